import init, { builtin_names, conjugate_plot, proj_map, representation } from "./pkg/hamrep_wasm.js";

const $ = (id) => document.getElementById(id);

function showError(e) {
  $("err").textContent = e ? String(e) : "";
}

// Fit a view box around the given points, draw axes, return a mapper.
function frame(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const fx = xs.filter(Number.isFinite), fy = ys.filter(Number.isFinite);
  let [x0, x1] = [Math.min(...fx), Math.max(...fx)];
  let [y0, y1] = [Math.min(...fy), Math.max(...fy)];
  if (x1 - x0 < 1e-9) { x0 -= 1; x1 += 1; }
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const pad = 0.08;
  const dx = (x1 - x0) * pad, dy = (y1 - y0) * pad;
  x0 -= dx; x1 += dx; y0 -= dy; y1 += dy;
  const W = canvas.width, H = canvas.height;
  const map = (x, y) => [((x - x0) / (x1 - x0)) * W, H - ((y - y0) / (y1 - y0)) * H];
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  const [ax, ay] = map(0, 0);
  ctx.moveTo(0, ay); ctx.lineTo(W, ay);
  ctx.moveTo(ax, 0); ctx.lineTo(ax, H);
  ctx.stroke();
  return { ctx, map };
}

function curve({ ctx, map }, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  let pen = false;
  xs.forEach((x, i) => {
    const y = ys[i];
    if (y === null || !Number.isFinite(y)) { pen = false; return; }
    const [u, v] = map(x, y);
    pen ? ctx.lineTo(u, v) : ctx.moveTo(u, v);
    pen = true;
  });
  ctx.stroke();
  ctx.lineWidth = 1;
}

function polygon({ ctx, map }, pts, stroke, fill) {
  if (!pts.length) return;
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const [u, v] = map(x, y);
    i ? ctx.lineTo(u, v) : ctx.moveTo(u, v);
  });
  ctx.closePath();
  if (fill) { ctx.fillStyle = fill; ctx.fill(); }
  ctx.strokeStyle = stroke;
  ctx.stroke();
}

function dots({ ctx, map }, pts, color, r = 2) {
  ctx.fillStyle = color;
  for (const [x, y] of pts) {
    const [u, v] = map(x, y);
    ctx.beginPath();
    ctx.arc(u, v, r, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function conjugate() {
  const name = $("c-name").value, t = +$("c-t").value, x = +$("c-x").value;
  $("c-t-out").textContent = t; $("c-x-out").textContent = x;
  try {
    const d = JSON.parse(conjugate_plot(name, t, x));
    curve(frame($("c-h"), d.p, d.h), d.p, d.h, "#1565c0");
    const ys = d.l.concat(d.oracle).filter((y) => y !== null && y < 1e3);
    const f = frame($("c-l"), d.v, ys);
    curve(f, d.v, d.oracle.map((y) => (y !== null && y < 1e3 ? y : null)), "#2e7d32");
    curve(f, d.v, d.l, "#c62828");
    showError();
  } catch (e) { showError(e); }
}

const geo = { pts: [[-2, -1], [2, -1.5], [1.5, 2], [-1.5, 1.5]], y: [3, 3] };

function geometry() {
  const c = $("g");
  const f = frame(c, [-5, 5], [-5, 5]);
  geo.map = f.map;
  dots(f, geo.pts, "#555", 3);
  dots(f, [geo.y], "#000", 4);
  if (geo.pts.length === 0) return;
  try {
    const d = JSON.parse(proj_map(JSON.stringify(geo.pts), geo.y[0], geo.y[1]));
    polygon(f, d.body, "#1565c0", "rgba(21,101,192,0.08)");
    polygon(f, d.proj, "#c62828", "rgba(198,40,40,0.25)");
    dots(f, [d.steiner], "#2e7d32", 5);
    $("g-info").textContent =
      `d(y,K) = ${d.distance.toFixed(4)}; Steiner point of P(y,K): ` +
      `(${d.steiner[0].toFixed(4)}, ${d.steiner[1].toFixed(4)}), exact ` +
      `(${d.steiner_exact[0].toFixed(4)}, ${d.steiner_exact[1].toFixed(4)})`;
    showError();
  } catch (e) { showError(e); }
}

function canvasToWorld(ev) {
  const c = $("g"), r = c.getBoundingClientRect();
  const u = ev.clientX - r.left, v = ev.clientY - r.top;
  return [-5 - 0.8 + (u / c.width) * 11.6, 5 + 0.8 - (v / c.height) * 11.6];
}

function repr() {
  const name = $("r-name").value, x = +$("r-x").value, compact = $("r-compact").checked;
  $("r-x-out").textContent = x;
  try {
    const d = JSON.parse(representation(name, 0.5, x, compact));
    const all = d.epigraph.concat(d.images);
    const f = frame($("r-e"), all.map((p) => p[0]), all.map((p) => p[1]));
    polygon(f, d.epigraph, "#999", "rgba(0,0,0,0.05)");
    dots(f, d.images, "#c62828", 2);
    const g = frame($("r-h"), d.p, d.h.concat(d.reconstructed));
    curve(g, d.p, d.h, "#1565c0");
    curve(g, d.p, d.reconstructed, "#2e7d32");
    showError();
  } catch (e) { showError(e); }
}

await init();
for (const id of ["c-name", "r-name"]) {
  for (const n of JSON.parse(builtin_names())) {
    const o = document.createElement("option");
    o.value = o.textContent = n;
    $(id).appendChild(o);
  }
}
$("r-name").value = "ex_2_2";
["c-name", "c-t", "c-x"].forEach((id) => $(id).addEventListener("input", conjugate));
["r-name", "r-x", "r-compact"].forEach((id) => $(id).addEventListener("input", repr));
$("g").addEventListener("click", (ev) => {
  const w = canvasToWorld(ev);
  ev.shiftKey ? (geo.y = w) : geo.pts.push(w);
  geometry();
});
$("g-clear").addEventListener("click", () => { geo.pts = []; geometry(); });
conjugate();
geometry();
repr();
