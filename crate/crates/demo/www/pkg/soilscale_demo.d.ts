/* tslint:disable */
/* eslint-disable */

/**
 * One synthetic day at 40 x 40 fine pixels over an 8 x 8 coarse grid.
 */
export class DemoScene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Hard cluster labels of the fine pixels.
     */
    cluster(k: number, psi: number, seed: number): Uint32Array;
    cols(): number;
    day(): number;
    /**
     * Fine-grid layer by name: `lst`, `lai`, `ppt`, `lc`, `truth`,
     * `coarse` (replicated to the fine grid) or `insitu` (NaN elsewhere).
     */
    layer(name: string): Float64Array;
    constructor(day: number, seed: number);
    /**
     * PRI estimate with the given trade-off weight.
     */
    pri(beta: number, iterations: number): Float64Array;
    /**
     * RMSE of a fine-grid estimate against the truth.
     */
    rmse(estimate: Float64Array): number;
    rows(): number;
    /**
     * SRRM estimate for fixed hyper-parameters.
     */
    srrm(k: number, psi: number, mu: number, seed: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoscene_free: (a: number, b: number) => void;
    readonly demoscene_cluster: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demoscene_cols: (a: number) => number;
    readonly demoscene_day: (a: number) => number;
    readonly demoscene_layer: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demoscene_new: (a: number, b: number) => [number, number, number];
    readonly demoscene_pri: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demoscene_rmse: (a: number, b: number, c: number) => [number, number, number];
    readonly demoscene_rows: (a: number) => number;
    readonly demoscene_srrm: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
