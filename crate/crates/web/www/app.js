import init, { scalarCurves, runPair, runSearch } from "./pkg/riccati_web.js";

const $ = (id) => document.getElementById(id);
const num = (form, name) => Number(form.elements[name].value);
const list = (text) => text.split(/[,\s]+/).filter(Boolean).map(Number);
const fmt = (x) => (x == null ? "" : x.toFixed(4));

function call(fn, ...args) {
  try {
    return { ok: JSON.parse(fn(...args)) };
  } catch (e) {
    return { err: String(e) };
  }
}

// Minimal line plot: series = [{ x, y, color, dash }], y values may be null.
function plot(canvas, series, { xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 50, r: 15, t: 10, b: 35 };
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).filter((v) => v != null && Number.isFinite(v));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const X = (x) => pad.l + ((x - x0) / (x1 - x0 || 1)) * (w - pad.l - pad.r);
  const Y = (y) => h - pad.b - ((y - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  for (let i = 0; i <= 4; i++) {
    const xv = x0 + ((x1 - x0) * i) / 4;
    const yv = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(xv.toFixed(2), X(xv) - 12, h - pad.b + 15);
    ctx.fillText(yv.toFixed(2), 4, Y(yv) + 4);
  }
  ctx.fillText(xLabel, w / 2, h - 5);
  ctx.fillText(yLabel, 4, pad.t + 10);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.setLineDash(s.dash ? [6, 4] : []);
    ctx.beginPath();
    let pen = false;
    s.x.forEach((x, i) => {
      const y = s.y[i];
      if (y == null || y < y0 || y > y1) { pen = false; return; }
      pen ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y));
      pen = true;
      if (s.markers) ctx.fillRect(X(x) - 2, Y(y) - 2, 4, 4);
    });
    ctx.stroke();
  }
}

function legend(items) {
  return items.map(([color, text]) => `<span style="color:${color}">&#9632;</span> ${text}`).join(" &nbsp; ");
}

function drawCurves(form) {
  const r = call(scalarCurves, num(form, "a"), num(form, "b"), num(form, "q"), num(form, "r"), 0, num(form, "pmax"), 601);
  if (r.err) { $("curves-info").innerHTML = `<span class="bad">${r.err}</span>`; return; }
  const c = r.ok;
  const cap = (v) => (v == null || v > 3 * num(form, "pmax") ? null : v);
  plot($("curves"), [
    { x: c.p, y: c.p, color: "#888", dash: true },
    { x: c.p, y: c.newton_hewer.map(cap), color: "#1565c0" },
    { x: c.p, y: c.riccati_difference.map(cap), color: "#e65100" },
  ], { xLabel: "P_t", yLabel: "P_t+1" });
  $("curves-info").innerHTML =
    legend([["#888", "identity"], ["#1565c0", "Newton-Hewer"], ["#e65100", "Riccati difference"]]) +
    `<br>Fixed point P* = ${c.fixed_point.toFixed(10)}. Newton-Hewer points left blank where the induced gain is not stabilizing.`;
}

function drawPair(form) {
  const preset = form.elements.preset.value;
  const request = preset === "custom"
    ? {
        a: num(form, "a"), b: num(form, "b"), r: num(form, "r"),
        first: { q: list(form.elements.q1.value), k0: num(form, "k1") },
        second: { q: list(form.elements.q2.value), k0: num(form, "k2") },
        extension: form.elements.extension.value,
        horizon: num(form, "horizon"),
      }
    : { example: preset, horizon: num(form, "horizon") };
  const r = call(runPair, JSON.stringify(request));
  if (r.err) { $("pair-info").innerHTML = `<span class="bad">${r.err}</span>`; return; }
  const { first, second, report, notes } = r.ok;
  const t = first.p.map((_, i) => i + 1);
  plot($("pair"), [
    { x: t, y: first.p, color: "#1565c0", markers: true },
    { x: t, y: second.p, color: "#c62828", markers: true, dash: true },
  ], { xLabel: "t", yLabel: "P_t" });

  const verdict = report.inconclusive
    ? `<span>Inconclusive: initial iterates are equal or incomparable (${report.initial_relation.relation}).</span>`
    : report.first_violation != null
      ? `<span class="bad">Order lost at step ${report.first_violation}</span> (witness eigenvalue ${report.violation_witness.min_eigenvalue.toExponential(3)})`
      : `<span class="good">Order preserved over ${report.compared_steps} steps</span>`;
  const rows = t.map((s, i) =>
    `<tr><td>${s}</td><td>${fmt(first.q[i])}</td><td>${fmt(first.p[i])}</td><td>${fmt(first.k[i])}</td>` +
    `<td>${fmt(second.q[i])}</td><td>${fmt(second.p[i])}</td><td>${fmt(second.k[i])}</td>` +
    `<td>${report.per_step[i]?.relation ?? ""}</td></tr>`).join("");
  $("pair-info").innerHTML =
    legend([["#1565c0", first.label], ["#c62828", second.label]]) + `<br>${verdict}` +
    `<table><tr><th>t</th><th>Q</th><th>P</th><th>K</th><th>Q&#770;</th><th>P&#770;</th><th>K&#770;</th><th>relation</th></tr>${rows}</table>` +
    (notes.length ? `<ul>${notes.map((n) => `<li>${n}</li>`).join("")}</ul>` : "");
}

function doSearch(form) {
  const info = $("search-info");
  info.textContent = "Searching...";
  setTimeout(() => {
    const started = performance.now();
    const r = call(runSearch, form.elements.name.value, BigInt(num(form, "seed")), num(form, "budget"));
    const ms = (performance.now() - started).toFixed(0);
    const pre = $("search-json");
    if (r.err) { info.innerHTML = `<span class="bad">${r.err}</span>`; pre.hidden = true; return; }
    const c = r.ok.counterexample;
    info.innerHTML = c
      ? `<span class="bad">Counterexample</span> at sample ${c.sample_index}: order lost at step ${c.violating_step} (revalidated: ${c.revalidated}), ${ms} ms`
      : `<span class="good">None found</span> in ${r.ok.budget} samples, ${ms} ms`;
    pre.textContent = JSON.stringify(r.ok, null, 2);
    pre.hidden = false;
  }, 0);
}

function bind(id, handler) {
  const form = $(id);
  form.addEventListener("submit", (e) => { e.preventDefault(); handler(form); });
  return form;
}

await init();
$("status").textContent = "Ready.";
drawCurves(bind("curves-form", drawCurves));
drawPair(bind("pair-form", drawPair));
bind("search-form", doSearch);
