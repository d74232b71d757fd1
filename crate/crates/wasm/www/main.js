import init, { pluckerRgba, epipolarRgba, epipolarWidth, guidanceJson } from "./pkg/epicam_wasm.js";

const PLK = 64;
const EPI = 128;
const $ = (id) => document.getElementById(id);
let query = { x: EPI / 3, y: EPI / 2 };

function params() {
  return { kind: $("kind").value, mag: Number($("mag").value), frame: Number($("frame").value) };
}

function blit(canvas, rgba, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
}

function drawPlucker() {
  const { kind, mag, frame } = params();
  const moment = document.querySelector("input[name=part]:checked").value === "moment";
  blit($("plk"), pluckerRgba(kind, mag, frame, PLK, moment), PLK, PLK);
}

function drawEpipolar() {
  const { kind, mag, frame } = params();
  const msg = $("epiMsg");
  msg.className = "";
  try {
    blit($("epi"), epipolarRgba(kind, mag, frame, EPI, query.x | 0, query.y | 0), epipolarWidth(EPI), EPI);
    msg.textContent = `query (${query.x | 0}, ${query.y | 0}) in frame ${frame}`;
  } catch (e) {
    msg.className = "err";
    msg.textContent = e.message ?? String(e);
  }
}

function runGuidance() {
  const out = JSON.parse(guidanceJson(Number($("w0").value), Number($("w1").value), 32, 1));
  const rows = out.frames.map((f, i) =>
    `<tr><td>${i + 1}</td><td>${f.omega.toFixed(3)}</td><td>${f.mean.toFixed(3)}</td></tr>`);
  $("guide").innerHTML = "<tr><th>frame</th><th>ω</th><th>mean</th></tr>" + rows.join("");
}

function redraw() {
  $("frameOut").textContent = $("frame").value;
  drawPlucker();
  drawEpipolar();
}

await init();
for (const id of ["kind", "mag", "frame"]) $(id).addEventListener("input", redraw);
for (const r of document.querySelectorAll("input[name=part]")) r.addEventListener("change", drawPlucker);
$("epi").addEventListener("click", (ev) => {
  const c = ev.currentTarget;
  const x = (ev.offsetX * c.width) / c.clientWidth;
  const y = (ev.offsetY * c.height) / c.clientHeight;
  if (x < EPI) {
    query = { x, y };
    drawEpipolar();
  }
});
$("run").addEventListener("click", runGuidance);
redraw();
runGuidance();
