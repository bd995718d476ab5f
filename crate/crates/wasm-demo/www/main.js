import init, { greenProfile, modeSpectrum, decayConstants, SineGordonField } from "./pkg/esjj_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function params() {
  return [num("alpha"), num("epsilon"), num("lambda"), num("length")];
}

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

function showError(ctx, e) {
  clear(ctx);
  ctx.fillStyle = "#b00";
  ctx.fillText(String(e.message ?? e), 10, 20);
}

function linePlot(ctx, ys, color) {
  const { width: w, height: h } = ctx.canvas;
  const lo = Math.min(0, ...ys), hi = Math.max(0, ...ys);
  const span = hi - lo || 1;
  const y = (v) => h - 10 - ((v - lo) / span) * (h - 20);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(0, y(0));
  ctx.lineTo(w, y(0));
  ctx.stroke();
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ys.forEach((v, k) => {
    const x = (k / (ys.length - 1)) * w;
    k ? ctx.lineTo(x, y(v)) : ctx.moveTo(x, y(v));
  });
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = "#222";
  ctx.fillText(`max ${hi.toExponential(3)}  min ${lo.toExponential(3)}`, 8, 14);
}

function drawGreen() {
  const ctx = $("green").getContext("2d");
  try {
    const [a, e, lam, l] = params();
    const ys = greenProfile(a, e, lam, l, num("xi") * l, num("t"), 301, $("selfadjoint").checked);
    clear(ctx);
    linePlot(ctx, Array.from(ys), "#1f77b4");
  } catch (err) {
    showError(ctx, err);
  }
}

function drawSpectrum() {
  const ctx = $("spectrum").getContext("2d");
  try {
    const [a, e, lam, l] = params();
    const n = Math.max(1, Math.min(512, parseInt($("nmodes").value, 10) || 1));
    const s = modeSpectrum(a, e, lam, l, n);
    const { width: w, height: h } = ctx.canvas;
    clear(ctx);
    const sym = (v) => Math.sign(v) * Math.log10(1 + Math.abs(v));
    const vals = Array.from({ length: n }, (_, k) => sym(s[4 * k + 2]));
    const m = Math.max(...vals.map(Math.abs)) || 1;
    const bw = w / n;
    const colors = ["#1f77b4", "#ff7f0e", "#000"];
    for (let k = 0; k < n; k++) {
      const bar = (vals[k] / m) * (h / 2 - 5);
      ctx.fillStyle = colors[s[4 * k + 3]];
      ctx.fillRect(k * bw + 1, h / 2 - Math.max(bar, 0), Math.max(bw - 2, 1), Math.abs(bar) || 1);
    }
  } catch (err) {
    showError(ctx, err);
  }
}

function drawConstants() {
  try {
    const [d, p, q] = decayConstants(...params());
    $("constants").textContent = `delta = ${d.toPrecision(6)}   p_lambda = ${p.toPrecision(6)}   q_lambda = ${q.toPrecision(6)}`;
    $("constants").className = "out";
  } catch (err) {
    $("constants").textContent = String(err.message ?? err);
    $("constants").className = "out err";
  }
}

function heatmap(ctx, values, nx, nt) {
  const { width: w, height: h } = ctx.canvas;
  const m = Math.max(...values.map(Math.abs)) || 1;
  const img = ctx.createImageData(w, h);
  for (let py = 0; py < h; py++) {
    const j = Math.min(nt - 1, Math.floor(((h - 1 - py) / h) * nt));
    for (let px = 0; px < w; px++) {
      const i = Math.min(nx - 1, Math.floor((px / w) * nx));
      const v = values[j * nx + i] / m;
      const o = 4 * (py * w + px);
      img.data[o] = v > 0 ? 255 : Math.round(255 * (1 + v));
      img.data[o + 1] = Math.round(255 * (1 - Math.abs(v)));
      img.data[o + 2] = v < 0 ? 255 : Math.round(255 * (1 - v));
      img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
  ctx.fillStyle = "#222";
  ctx.fillText(`x across, t upward; |u| max ${m.toExponential(3)}`, 8, 14);
}

function runField() {
  const ctx = $("field").getContext("2d");
  const [a, e, lam, l] = params();
  $("report").textContent = "solving...";
  setTimeout(() => {
    try {
      const f = new SineGordonField(a, e, lam, l, num("horizon"), num("gamma"), num("amp"), 65, 81);
      heatmap(ctx, Array.from(f.values()), f.nx, f.nt);
      $("report").textContent =
        `contraction ratio ${f.contractionRatio.toExponential(3)}, ` +
        `iterations per window ${f.iterations}, residual ${f.residual.toExponential(3)}`;
      f.free();
    } catch (err) {
      showError(ctx, err);
      $("report").textContent = "";
    }
  }, 0);
}

function redraw() {
  drawConstants();
  drawGreen();
  drawSpectrum();
}

await init();
for (const id of ["alpha", "epsilon", "lambda", "length", "xi", "t", "selfadjoint", "nmodes"]) {
  $(id).addEventListener("input", redraw);
}
$("run").addEventListener("click", runField);
redraw();
