import init, { dephasing_curve, classical_sweep, main_theorem } from "./pkg/cetradeoff_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c"];
const canvas = document.getElementById("plot");
const status = document.getElementById("status");
const value = (id) => Number(document.getElementById(id).value);

function draw(data) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 60, r: 20, t: 30, b: 45 };
  ctx.clearRect(0, 0, w, h);
  const pts = data.series.flatMap((s) => s.points);
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const sx = (x) => pad.l + ((x - x0) / (x1 - x0 || 1)) * (w - pad.l - pad.r);
  const sy = (y) => h - pad.b - ((y - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  if (data.shade) {
    ctx.fillStyle = "rgba(244, 197, 66, 0.3)";
    ctx.fillRect(sx(data.shade[0]), pad.t, Math.max(1, sx(data.shade[1]) - sx(data.shade[0])), h - pad.t - pad.b);
  }
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, h - pad.b);
  ctx.lineTo(w - pad.r, h - pad.b);
  ctx.stroke();
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const xv = x0 + ((x1 - x0) * k) / 4;
    const yv = y0 + ((y1 - y0) * k) / 4;
    ctx.textAlign = "center";
    ctx.fillText(xv.toFixed(2), sx(xv), h - pad.b + 16);
    ctx.textAlign = "right";
    ctx.fillText(yv.toFixed(3), pad.l - 6, sy(yv) + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText(data.x_label, pad.l + (w - pad.l - pad.r) / 2, h - 8);
  ctx.fillText(data.title, w / 2, 18);

  data.series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.points.forEach(([x, y], j) => (j ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.textAlign = "left";
    ctx.fillText(s.label, pad.l + 12, pad.t + 14 + 16 * i);
  });
  ctx.lineWidth = 1;
}

function run(label, compute, describe) {
  status.textContent = `${label}: computing...`;
  // Let the status line paint before the synchronous solve.
  setTimeout(() => {
    const t = performance.now();
    const data = JSON.parse(compute());
    if (data.error) {
      status.textContent = `${label}: ${data.error}`;
      return;
    }
    draw(data);
    const ms = (performance.now() - t).toFixed(0);
    status.textContent = `${label}: ${describe ? describe(data) : "done"} (${ms} ms)`;
  }, 10);
}

await init();

document.getElementById("deph-run").onclick = () =>
  run("dephasing", () => dephasing_curve(value("deph-lambda"), value("deph-points"), 0n));
document.getElementById("cl-run").onclick = () =>
  run("classical", () => classical_sweep(value("cl-dim"), 101));
document.getElementById("mt-run").onclick = () =>
  run("flagged", () => main_theorem(value("mt-eps"), value("mt-lambda"), 9, 0n), (d) =>
    d.shade ? `witness interval [${d.shade[0].toFixed(3)}, ${d.shade[1].toFixed(3)}]` : "no witness");

document.getElementById("deph-run").click();
