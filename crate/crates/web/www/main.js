import init, { intensity_carpet, correlation_map, splitter_summary } from "./pkg/wgcorr_web.js";

const $ = (id) => document.getElementById(id);
const status = $("status");

// perceptually ordered dark-blue to yellow ramp
const RAMP = [[13, 8, 135], [126, 3, 168], [204, 71, 120], [248, 149, 64], [240, 249, 33]];

function color(t) {
  const x = Math.min(Math.max(t, 0), 1) * (RAMP.length - 1);
  const i = Math.min(Math.floor(x), RAMP.length - 2);
  const f = x - i;
  return RAMP[i].map((c, k) => c + f * (RAMP[i + 1][k] - c));
}

function paint(canvas, values, cols, rows) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(cols, rows);
  let peak = 0;
  for (const v of values) peak = Math.max(peak, v);
  values.forEach((v, i) => {
    const [r, g, b] = color(peak > 0 ? v / peak : 0);
    img.data.set([r, g, b, 255], 4 * i);
  });
  const tmp = new OffscreenCanvas(cols, rows);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function guarded(fn) {
  return () => {
    try {
      fn();
      status.textContent = "";
    } catch (e) {
      status.textContent = e.message ?? String(e);
    }
  };
}

const drawCarpet = guarded(() => {
  const positions = new Float64Array($("carpet-beams").value.split(",").map(Number));
  const end = Number($("carpet-end").value);
  const rows = 240, cols = 256;
  paint($("carpet"), intensity_carpet(4, positions, end, rows, cols), cols, rows);
});

const drawMap = guarded(() => {
  const length = Number($("map-length").value);
  const k = 128;
  const g = correlation_map(length, new Float64Array([0.25, 0.75]), length, $("map-state").value, k);
  paint($("map"), g, k, k);
});

const drawSummary = guarded(() => {
  const [length, beams] = $("split-length").value.split(":").map(Number);
  const s = JSON.parse(splitter_summary(length, beams));
  const fmt = (v) => v.toFixed(4);
  const moduli = s.moduli.map((row) => `<tr>${row.map((v) => `<td>${fmt(v)}</td>`).join("")}</tr>`).join("");
  const fock = s.fock
    .map(([occ, p]) => `<tr><th>|${occ.join("")}⟩</th><td>${fmt(p)}</td></tr>`)
    .join("");
  $("summary").innerHTML = `
    <p>D = ${s.width_um.toFixed(2)} µm, unitarity residual ${s.unitarity_residual.toExponential(1)}</p>
    <p>|T| (row = output lobe)</p><table>${moduli}</table>
    <p>one photon per beam</p><table>${fock}</table>
    <p>same-lobe fraction: quantum ${fmt(s.quantum_bunched)}, pseudo-thermal ${fmt(s.thermal_bunched)}</p>`;
});

await init();
for (const [ids, draw] of [[["carpet-beams", "carpet-end"], drawCarpet], [["map-length", "map-state"], drawMap], [["split-length"], drawSummary]]) {
  ids.forEach((id) => $(id).addEventListener("change", draw));
  draw();
}
