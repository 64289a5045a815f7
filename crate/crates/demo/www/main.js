import init, { DemoScene } from "./pkg/soilscale_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let scene = null;

function ramp(t) {
  // white to dark blue
  const c = Math.round(255 * (1 - t));
  return [c, Math.round(120 + 135 * (1 - t)), 255];
}

const PALETTE = [
  [228, 26, 28], [55, 126, 184], [77, 175, 74], [152, 78, 163],
  [255, 127, 0], [255, 255, 51], [166, 86, 40], [247, 129, 191],
];

function draw(id, values, range, colors) {
  const canvas = $(id);
  const n = scene.rows(), m = scene.cols();
  canvas.width = m;
  canvas.height = n;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(m, n);
  let [lo, hi] = range ?? [Infinity, -Infinity];
  if (!range) {
    for (const v of values) if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  }
  values.forEach((v, i) => {
    const rgb = colors ? colors[v % colors.length]
      : ramp(Math.min(1, Math.max(0, (v - lo) / (hi - lo || 1))));
    img.data.set([...rgb, Number.isFinite(v) ? 255 : 0], 4 * i);
  });
  ctx.putImageData(img, 0, 0);
}

function timed(label, f) {
  $("status").textContent = `${label}…`;
  setTimeout(() => {
    const t = performance.now();
    try {
      const note = f();
      $("status").textContent = `${label}: ${((performance.now() - t) / 1000).toFixed(2)} s${note ? ", " + note : ""}`;
    } catch (e) {
      $("status").textContent = `${label} failed: ${e}`;
    }
  }, 0);
}

function smRange() {
  const t = scene.layer("truth");
  return [Math.min(...t), Math.max(...t)];
}

function generate() {
  timed("generate", () => {
    scene?.free();
    scene = new DemoScene(num("day"), num("seed"));
    const r = smRange();
    draw("truth", scene.layer("truth"), r);
    draw("coarse", scene.layer("coarse"), r);
    draw("lst", scene.layer("lst"));
    const rmse = scene.rmse(scene.layer("coarse"));
    return `day ${scene.day()}, coarse RMSE ${rmse.toFixed(4)}`;
  });
}

function estimate(label, f) {
  timed(label, () => {
    const sm = f();
    draw("out", sm, smRange());
    $("out-caption").textContent = label;
    return `RMSE ${scene.rmse(sm).toFixed(4)}`;
  });
}

$("generate").onclick = generate;
$("cluster").onclick = () => timed("cluster", () => {
  draw("out", scene.cluster(num("k"), num("psi"), num("seed")), null, PALETTE);
  $("out-caption").textContent = `clusters (K = ${num("k")})`;
});
$("srrm").onclick = () => estimate("SRRM", () => scene.srrm(num("k"), num("psi"), num("mu"), num("seed")));
$("pri").onclick = () => estimate("PRI", () => scene.pri(num("beta"), 100));

await init();
generate();
