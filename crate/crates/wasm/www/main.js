import init, { pairedPaths, momentTable, roundTrip } from "./pkg/gjr_cogarch_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const params = () => [num("theta"), num("eta"), num("phi"), num("gamma")];
const fmt = (v) => (Number.isFinite(v) ? v.toPrecision(6) : "n/a");

function status(msg, isError = false) {
  $("status").textContent = msg;
  $("status").className = isError ? "err" : "";
}

// Draws each series in `series` ([values, colour]) against a shared x axis.
function plot(canvas, xs, series, { zero = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  let lo = Infinity, hi = -Infinity;
  for (const [ys] of series) for (const y of ys) if (Number.isFinite(y)) { lo = Math.min(lo, y); hi = Math.max(hi, y); }
  if (zero) { lo = Math.min(lo, 0); hi = Math.max(hi, 0); }
  if (!(hi > lo)) { hi = lo + 1; }
  const x0 = xs[0], x1 = xs[xs.length - 1] || 1;
  const px = (x) => 40 + ((x - x0) / (x1 - x0 || 1)) * (w - 50);
  const py = (y) => h - 10 - ((y - lo) / (hi - lo)) * (h - 20);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, 12);
  ctx.fillText(lo.toPrecision(3), 2, h - 4);
  if (zero && lo < 0 && hi > 0) {
    ctx.strokeStyle = "#ddd";
    ctx.beginPath(); ctx.moveTo(40, py(0)); ctx.lineTo(w - 10, py(0)); ctx.stroke();
  }
  for (const [ys, colour] of series) {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
  }
}

function simulate() {
  try {
    const horizon = num("horizon");
    const rows = pairedPaths(...params(), horizon, Math.max(horizon / 2000, 1e-3), num("sigma0"), num("seed") >>> 0);
    const cols = [[], [], [], [], []];
    for (let i = 0; i < rows.length; i++) cols[i % 5].push(rows[i]);
    const [t, vs, gs, va, ga] = cols;
    const diff = (g) => g.map((v, i) => (i ? v - g[i - 1] : 0));
    plot($("price"), t, [[gs, "#888"], [ga, "#c0392b"]], { zero: true });
    plot($("returns"), t, [[diff(gs), "#888"], [diff(ga), "#c0392b"]], { zero: true });
    plot($("vol"), t, [[vs, "#888"], [va, "#c0392b"]]);
    status(`${t.length} grid points`);
  } catch (e) {
    status(String(e.message || e), true);
  }
}

function moments() {
  const p = params();
  const delta = num("delta");
  try {
    const lags = 60;
    const m = momentTable(...p, delta, lags);
    const names = ["Ψ(1)", "Ψ(2)", "stationary law", "E[σ²]", "E[G²]", "var(G²)"];
    const cells = names.map((n, i) => `<tr><th>${n}</th><td>${i === 2 ? (m[2] ? "yes" : "no") : fmt(m[i])}</td></tr>`);
    $("table").innerHTML = `<table>${cells.join("")}</table>`;
    const acf = Array.from(m.slice(6));
    plot($("acf"), acf.map((_, i) => (i + 1) * delta), [[acf, "#2c3e50"]], { zero: true });
    status(Number.isFinite(m[5]) ? "" : "fourth moment does not exist (Ψ(2) ≥ 0)");
  } catch (e) {
    status(String(e.message || e), true);
  }
  try {
    const r = roundTrip(...p, delta);
    const rows = [
      ["μ", r[0]], ["Γ", r[1]], ["k", r[2]], ["p", r[3]],
      ["θ̂", r[4]], ["η̂", r[5]], ["φ̂", r[6]], ["γ̂", r[7]], ["max rel. error", r[8]],
    ];
    $("roundtrip").innerHTML = `<table>${rows.map(([n, v]) => `<tr><th>${n}</th><td>${fmt(v)}</td></tr>`).join("")}</table>`;
  } catch (e) {
    $("roundtrip").innerHTML = `<p class="err">${e.message || e}</p>`;
  }
}

function fig1() {
  Object.entries({ theta: 0.0001, eta: -Math.log(0.9), phi: 1 / 18, gamma: 0.3, sigma0: 0.01, horizon: 1000 })
    .forEach(([k, v]) => ($(k).value = v));
  simulate();
  moments();
}

await init();
$("simulate").onclick = simulate;
$("moments").onclick = moments;
$("fig1").onclick = fig1;
simulate();
moments();
