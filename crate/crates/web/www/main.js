import init, { stringFrames, characteristicSpeeds, circleTrack } from "./pkg/extremal_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const list = (id) => $(id).value.split(",").map((s) => Number(s.trim()));

function plot(canvas, series, yRange) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const [lo, hi] = yRange;
  for (const { xs, ys, color } of series) {
    const x0 = xs[0], x1 = xs[xs.length - 1];
    ctx.strokeStyle = color;
    ctx.beginPath();
    xs.forEach((x, i) => {
      const px = ((x - x0) / (x1 - x0 || 1)) * (width - 20) + 10;
      const py = height - 10 - ((ys[i] - lo) / (hi - lo || 1)) * (height - 20);
      i ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
    });
    ctx.stroke();
  }
}

function runString() {
  const points = num("s-points");
  const frames = 120;
  try {
    const out = stringFrames(points, num("s-amp"), num("s-vel"), num("s-t"), frames);
    const norms = out.slice(frames * points);
    const xs = Array.from({ length: points }, (_, i) => (2 * Math.PI * i) / points);
    const bound = Math.max(...out.slice(0, frames * points).map(Math.abs)) || 1;
    let k = 0;
    const step = () => {
      const ys = Array.from(out.slice(k * points, (k + 1) * points));
      plot($("s-canvas"), [{ xs, ys, color: "#1763b5" }], [-bound, bound]);
      $("s-info").textContent = `frame ${k + 1}/${frames}, constraint norm ${norms[k].toExponential(2)}`;
      k = (k + 1) % frames;
      timer = setTimeout(step, 40);
    };
    clearTimeout(timer);
    step();
  } catch (e) {
    $("s-info").textContent = String(e);
  }
}
let timer;

function runSpeeds() {
  try {
    const speeds = characteristicSpeeds(num("c-m"), num("c-n"), list("c-w"), list("c-nu"));
    $("c-out").textContent = Array.from(speeds, (s) => s.toFixed(12)).join("\n");
  } catch (e) {
    $("c-out").textContent = String(e);
  }
}

function runCircle() {
  const track = circleTrack(num("k-points"), 1.0, num("k-frac"), 50);
  const xs = [], measured = [], exact = [];
  for (let i = 0; i < track.length; i += 3) {
    xs.push(track[i]);
    measured.push(track[i + 1]);
    exact.push(track[i + 2]);
  }
  plot($("k-canvas"), [
    { xs, ys: exact, color: "#999" },
    { xs, ys: measured, color: "#c0392b" },
  ], [0, 1]);
}

await init();
$("s-run").onclick = runString;
$("c-run").onclick = runSpeeds;
$("k-run").onclick = runCircle;
runString();
runSpeeds();
runCircle();
