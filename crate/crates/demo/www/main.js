import init, { kernel_margin_curve, numerical_range, radius_curve } from "./pkg/rhoharnack_demo.js";

const $ = (id) => document.getElementById(id);

const presets = {
  nilpotent: { dim: 2, entries: [[[0, 0], [2, 0]], [[0, 0], [0, 0]]] },
  jordan: {
    dim: 3,
    entries: [
      [[0, 0], [1, 0], [0, 0]],
      [[0, 0], [0, 0], [1, 0]],
      [[0, 0], [0, 0], [0, 0]],
    ],
  },
  diag: { dim: 2, entries: [[[0.9, 0], [0, 0]], [[0, 0], [0, -0.5]]] },
};

// Maps data coordinates to canvas pixels with a margin for axis labels.
function frame(canvas, xmin, xmax, ymin, ymax) {
  const ctx = canvas.getContext("2d");
  const pad = 36;
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px system-ui";
  ctx.fillStyle = "#333";
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad, w, h);
  const x = (v) => pad + ((v - xmin) / (xmax - xmin)) * w;
  const y = (v) => pad + h - ((v - ymin) / (ymax - ymin)) * h;
  ctx.fillText(xmin.toPrecision(3), pad, pad + h + 16);
  ctx.fillText(xmax.toPrecision(3), pad + w - 28, pad + h + 16);
  ctx.fillText(ymax.toPrecision(3), 2, pad + 4);
  ctx.fillText(ymin.toPrecision(3), 2, pad + h);
  return { ctx, x, y };
}

function polyline(ctx, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  xs.forEach((px, i) => (i ? ctx.lineTo(px, ys[i]) : ctx.moveTo(px, ys[i])));
  ctx.stroke();
}

function hline(f, xmin, xmax, v, color) {
  f.ctx.strokeStyle = color;
  f.ctx.setLineDash([4, 4]);
  f.ctx.beginPath();
  f.ctx.moveTo(f.x(xmin), f.y(v));
  f.ctx.lineTo(f.x(xmax), f.y(v));
  f.ctx.stroke();
  f.ctx.setLineDash([]);
}

function drawMargin(matrix) {
  const rho = Number($("rho").value);
  const r = Number($("r").value);
  $("rho-out").textContent = rho.toFixed(2);
  $("r-out").textContent = r.toFixed(2);
  const data = JSON.parse(kernel_margin_curve(matrix, rho, r, 256));
  const lo = Math.min(0, ...data.min_eig);
  const hi = Math.max(0, ...data.min_eig);
  const span = hi - lo || 1;
  const f = frame($("margin"), 0, 2 * Math.PI, lo - 0.05 * span, hi + 0.05 * span);
  hline(f, 0, 2 * Math.PI, 0, "#c33");
  polyline(f.ctx, data.theta.map(f.x), data.min_eig.map(f.y), "#1f5fa8");
  const worst = Math.min(...data.min_eig);
  $("margin-note").textContent =
    `smallest eigenvalue of the kernel on |z| = ${r.toFixed(2)}: min ${worst.toExponential(3)}` +
    (worst < -1e-9 ? " (negative: not a rho-contraction)" : "");
}

function drawRange(matrix) {
  const data = JSON.parse(numerical_range(matrix, 512));
  const m = Math.max(1, data.numerical_radius) * 1.1;
  const f = frame($("range"), -m, m, -m, m);
  const t = [...Array(257).keys()].map((k) => (2 * Math.PI * k) / 256);
  polyline(f.ctx, t.map((a) => f.x(Math.cos(a))), t.map((a) => f.y(Math.sin(a))), "#bbb");
  const xs = data.re.concat(data.re[0]).map(f.x);
  const ys = data.im.concat(data.im[0]).map(f.y);
  polyline(f.ctx, xs, ys, "#1f5fa8");
  f.ctx.fillStyle = "#c33";
  data.on_torus.forEach((hit, i) => {
    if (hit) f.ctx.fillRect(f.x(data.re[i]) - 2, f.y(data.im[i]) - 2, 4, 4);
  });
  const hits = data.on_torus.filter(Boolean).length;
  $("range-note").textContent =
    `numerical radius ${data.numerical_radius.toFixed(6)}; ${hits} of ${data.on_torus.length} support points on the unit circle (red)`;
}

function drawRadius(matrix) {
  const rhoMax = Number($("rho-max").value);
  $("rho-max-out").textContent = rhoMax.toFixed(1);
  const data = JSON.parse(radius_curve(matrix, 1, rhoMax, 24));
  const hi = Math.max(...data.w) * 1.1 || 1;
  const f = frame($("radius"), 1, rhoMax, 0, hi);
  hline(f, 1, rhoMax, 1, "#c33");
  polyline(f.ctx, data.rho.map(f.x), data.w.map(f.y), "#1f5fa8");
  $("radius-note").textContent =
    `w_1 = ${data.w[0].toFixed(5)} (operator norm), w_${rhoMax} = ${data.w[data.w.length - 1].toFixed(5)}`;
}

function guarded(draw) {
  return () => {
    try {
      draw($("matrix").value);
      $("error").textContent = "";
    } catch (e) {
      $("error").textContent = String(e);
    }
  };
}

const margin = guarded(drawMargin);
const range = guarded(drawRange);
const radius = guarded(drawRadius);
const all = () => {
  margin();
  range();
  radius();
};

await init();
$("rho").addEventListener("input", margin);
$("r").addEventListener("input", margin);
$("rho-max").addEventListener("input", radius);
$("apply").addEventListener("click", all);
document.querySelectorAll("[data-preset]").forEach((b) =>
  b.addEventListener("click", () => {
    $("matrix").value = JSON.stringify(presets[b.dataset.preset]);
    all();
  }),
);
all();
