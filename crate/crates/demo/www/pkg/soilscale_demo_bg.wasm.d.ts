/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoscene_free: (a: number, b: number) => void;
export const demoscene_cluster: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const demoscene_cols: (a: number) => number;
export const demoscene_day: (a: number) => number;
export const demoscene_layer: (a: number, b: number, c: number) => [number, number, number, number];
export const demoscene_new: (a: number, b: number) => [number, number, number];
export const demoscene_pri: (a: number, b: number, c: number) => [number, number, number, number];
export const demoscene_rmse: (a: number, b: number, c: number) => [number, number, number];
export const demoscene_rows: (a: number) => number;
export const demoscene_srrm: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
