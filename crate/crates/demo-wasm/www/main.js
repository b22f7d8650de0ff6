import init, { lp_distance, plateau_profile, witness_field } from "./pkg/levy_prokhorov_demo.js";

const $ = (id) => document.getElementById(id);

function guarded(errId, f) {
  return () => {
    $(errId).textContent = "";
    try {
      f();
    } catch (e) {
      $(errId).textContent = e.message ?? String(e);
    }
  };
}

// Grayscale ramp: W = 0 black, W = 1 white.
function shade(w) {
  const v = Math.round(255 * Math.min(1, Math.max(0, w)));
  return [v, Math.round(v * 0.95 + 10), Math.min(255, v + 25)];
}

let field = null;

function drawHeatmap() {
  const text = $("mu").value;
  const lo = Number($("lo").value), hi = Number($("hi").value), n = Number($("n").value);
  const values = witness_field(text, lo, hi, n);
  field = { lo, hi, n, values };
  const canvas = $("heat"), ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  for (let k = 0; k < n * n; k++) {
    // Rows run upward on screen.
    const i = n - 1 - Math.floor(k / n), j = k % n;
    const [r, g, b] = shade(values[k]);
    const o = 4 * (i * n + j);
    img.data.set([r, g, b, 255], o);
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  const px = (x) => ((x - lo) / (hi - lo)) * canvas.width;
  const py = (y) => canvas.height - ((y - lo) / (hi - lo)) * canvas.height;
  JSON.parse(text).atoms.forEach((a, idx) => {
    ctx.beginPath();
    ctx.arc(px(a.point[0]), py(a.point[1]), 3 + 12 * Math.sqrt(a.weight), 0, 2 * Math.PI);
    ctx.strokeStyle = "#e33";
    ctx.stroke();
    ctx.fillStyle = "#e33";
    ctx.fillText(String(idx), px(a.point[0]) + 4, py(a.point[1]) - 4);
  });
}

function hover(ev) {
  if (!field) return;
  const c = $("heat"), r = c.getBoundingClientRect();
  const j = Math.floor(((ev.clientX - r.left) / r.width) * field.n);
  const i = field.n - 1 - Math.floor(((ev.clientY - r.top) / r.height) * field.n);
  if (i < 0 || j < 0 || i >= field.n || j >= field.n) return;
  const at = (k) => field.lo + ((field.hi - field.lo) * k) / (field.n - 1);
  $("hover").textContent =
    `x = (${at(j).toFixed(3)}, ${at(i).toFixed(3)})  W = ${field.values[i * field.n + j].toFixed(4)}`;
}

function drawProfile() {
  const p = JSON.parse(plateau_profile($("mu").value, Number($("atom").value)));
  $("profile-out").textContent =
    `direction   ${p.direction.map((d) => d.toFixed(4)).join(", ")}\n` +
    `breakpoint  t* = ${p.breakpoint.toFixed(6)}\n` +
    `plateau     ${p.plateau.toFixed(6)}\n` +
    `λ̂           ${p.lambda_hat.toFixed(6)}   (true weight ${p.weight})`;
  const c = $("plot"), ctx = c.getContext("2d");
  const pad = 30, w = c.width - 2 * pad, h = c.height - 2 * pad;
  const tmax = p.samples[p.samples.length - 1][0];
  const X = (t) => pad + (t / tmax) * w, Y = (v) => pad + h - v * h;
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#555";
  ctx.fillText("0", pad - 12, pad + h + 4);
  ctx.fillText("1", pad - 12, pad + 4);
  ctx.fillText("t", pad + w + 6, pad + h + 4);
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#e33";
  ctx.beginPath();
  ctx.moveTo(X(p.breakpoint), pad);
  ctx.lineTo(X(p.breakpoint), pad + h);
  ctx.moveTo(pad, Y(p.plateau));
  ctx.lineTo(pad + w, Y(p.plateau));
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = "#225";
  ctx.lineWidth = 2;
  ctx.beginPath();
  p.samples.forEach(([t, v], k) => (k ? ctx.lineTo(X(t), Y(v)) : ctx.moveTo(X(t), Y(v))));
  ctx.stroke();
  ctx.lineWidth = 1;
}

function distance() {
  const v = lp_distance($("a").value, $("b").value, $("method").value);
  $("dist-out").textContent = `π = ${v}`;
}

await init();
$("draw").onclick = guarded("heat-err", drawHeatmap);
$("heat").onmousemove = hover;
$("profile").onclick = guarded("profile-err", drawProfile);
$("dist").onclick = guarded("dist-err", distance);
guarded("heat-err", drawHeatmap)();
guarded("profile-err", drawProfile)();
guarded("dist-err", distance)();
