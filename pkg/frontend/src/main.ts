/**
 * DOM wiring: connect to /session, render at display rate, forward controls.
 *
 * The page is a thin shell over ConsoleState + SessionConnection; all
 * dynamics arrive in snapshots.  Controls: drag on the vector pad sets u_c,
 * per-agent buttons toggle detection, plus pause/resume, reset, speed and
 * trail length.
 */

import { ConsoleState } from "./console-state.js";
import { SessionConnection } from "./connection.js";
import { interpolatePositions } from "./interpolate.js";
import { SceneRenderer } from "./render.js";
import { agentColor } from "./render.js";
import type { Command } from "./protocol.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scene");
const padCanvas = el<HTMLCanvasElement>("pad");
const banner = el<HTMLDivElement>("banner");
const rejectBox = el<HTMLDivElement>("reject");
const statusDot = el<HTMLSpanElement>("status");
const leadersBox = el<HTMLDivElement>("leaders");
const readPredicted = el<HTMLSpanElement>("read-predicted");
const readMeasured = el<HTMLSpanElement>("read-measured");
const readUc = el<HTMLSpanElement>("read-uc");
const readT = el<HTMLSpanElement>("read-t");
const readNl = el<HTMLSpanElement>("read-nl");
const readSumD = el<HTMLSpanElement>("read-sumd");
const readBound = el<HTMLSpanElement>("read-bound");
const bugsRow = el<HTMLDivElement>("bugs-row");
const gatheredFlag = el<HTMLSpanElement>("gathered");
const pauseBtn = el<HTMLButtonElement>("pause");
const resetBtn = el<HTMLButtonElement>("reset");
const speedInput = el<HTMLInputElement>("speed");
const trailInput = el<HTMLInputElement>("trail");
const padMaxInput = el<HTMLInputElement>("pad-max");

const state = new ConsoleState();
const renderer = new SceneRenderer(canvas.getContext("2d")!);

const wsUrl = (() => {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/session`;
})();

const connection = new SessionConnection(wsUrl, {
  onMessage: (msg) => {
    state.onMessage(msg, performance.now());
    if (msg.kind === "snapshot") syncControls();
  },
  onStatus: (status, detail) => {
    state.onStatus(status, detail);
    if (status !== "open") renderer.resetView();
  },
});

function send(command: Command): void {
  if (!connection.send(command)) {
    state.lastReject = "not connected";
  }
}

// ---- vector pad ----

let padVector: [number, number] = [0, 0];
let dragging = false;

function padMax(): number {
  const v = Number(padMaxInput.value);
  return Number.isFinite(v) && v > 0 ? v : 1;
}

function drawPad(): void {
  const ctx = padCanvas.getContext("2d")!;
  const w = padCanvas.width;
  const h = padCanvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(w / 2, 0);
  ctx.lineTo(w / 2, h);
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(w / 2, h / 2, Math.min(w, h) / 2 - 2, 0, 2 * Math.PI);
  ctx.stroke();
  const max = padMax();
  const px = w / 2 + (padVector[0] / max) * (w / 2 - 6);
  const py = h / 2 - (padVector[1] / max) * (h / 2 - 6);
  ctx.fillStyle = "#f5c542";
  ctx.beginPath();
  ctx.arc(px, py, 6, 0, 2 * Math.PI);
  ctx.fill();
}

function padEvent(ev: PointerEvent): [number, number] {
  const rect = padCanvas.getBoundingClientRect();
  const max = padMax();
  const x = ((ev.clientX - rect.left) / rect.width - 0.5) * 2 * max;
  const y = (0.5 - (ev.clientY - rect.top) / rect.height) * 2 * max;
  const norm = Math.hypot(x, y);
  if (norm > max) return [(x / norm) * max, (y / norm) * max];
  return [x, y];
}

padCanvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  padCanvas.setPointerCapture(ev.pointerId);
  padVector = padEvent(ev);
  drawPad();
});
padCanvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  padVector = padEvent(ev);
  drawPad();
});
padCanvas.addEventListener("pointerup", () => {
  dragging = false;
  send({ cmd: "set_uc", ux: padVector[0], uy: padVector[1] });
  drawPad();
});

// ---- leader toggles ----

let leaderButtons: HTMLButtonElement[] = [];

function rebuildLeaderButtons(n: number): void {
  leadersBox.textContent = "";
  leaderButtons = [];
  for (let i = 0; i < n; i++) {
    const btn = document.createElement("button");
    btn.textContent = String(i);
    btn.style.borderColor = agentColor(i);
    btn.addEventListener("click", () => {
      const snap = state.latest;
      if (!snap) return;
      const flags = snap.detect.map((f) => (f ? 1 : 0));
      flags[i] = flags[i] ? 0 : 1;
      send({ cmd: "set_leaders", flags });
    });
    leadersBox.appendChild(btn);
    leaderButtons.push(btn);
  }
}

function syncControls(): void {
  const snap = state.latest;
  if (!snap) return;
  if (leaderButtons.length !== snap.detect.length) {
    rebuildLeaderButtons(snap.detect.length);
  }
  snap.detect.forEach((f, i) => {
    leaderButtons[i].classList.toggle("on", f);
    leaderButtons[i].disabled = !snap.active[i];
  });
  pauseBtn.textContent = snap.paused ? "resume" : "pause";
  if (!dragging) {
    padVector = [snap.u_c[0], snap.u_c[1]];
    drawPad();
  }
}

// ---- simple controls ----

pauseBtn.addEventListener("click", () => {
  const snap = state.latest;
  send({ cmd: snap?.paused ? "resume" : "pause" });
});
resetBtn.addEventListener("click", () => {
  renderer.resetView();
  send({ cmd: "reset" });
});
speedInput.addEventListener("change", () => {
  const x = Number(speedInput.value);
  if (Number.isFinite(x) && x > 0) send({ cmd: "set_speed", x });
});
trailInput.addEventListener("change", () => {
  state.setTrailLength(Number(trailInput.value));
});

// ---- readouts + render loop ----

function fmtPair(p: [number, number] | null): string {
  return p ? `(${p[0].toFixed(3)}, ${p[1].toFixed(3)})` : "-";
}

function updateReadouts(): void {
  banner.textContent = state.banner ?? "";
  banner.hidden = state.banner === null;
  rejectBox.textContent = state.lastReject ? `rejected: ${state.lastReject}` : "";
  rejectBox.hidden = state.lastReject === null;
  statusDot.dataset.status = state.status;
  const snap = state.latest;
  if (!snap) return;
  readT.textContent = snap.t.toFixed(2);
  readNl.textContent = `${snap.n_l}/${snap.detect.length}`;
  readUc.textContent = fmtPair(snap.u_c);
  readPredicted.textContent = fmtPair(state.predictedVelocity());
  readMeasured.textContent = fmtPair(state.measuredMeanVelocity());
  const sumD = state.sumDistances();
  bugsRow.hidden = sumD === null && !snap.gathered;
  readSumD.textContent = sumD === null ? "-" : sumD.toFixed(4);
  const bound = state.gatherThreshold();
  readBound.textContent = bound === null ? "-" : bound.toFixed(4);
  gatheredFlag.hidden = !snap.gathered;
}

function frame(): void {
  const snap = state.latest;
  if (snap) {
    const positions = interpolatePositions(
      state.previous,
      snap,
      state.latestArrivedAt,
      performance.now(),
    );
    renderer.render(
      { snapshot: snap, positions, trails: state.trails },
      { width: canvas.width, height: canvas.height, margin: 30 },
    );
  }
  updateReadouts();
  requestAnimationFrame(frame);
}

state.setTrailLength(Number(trailInput.value) || 120);
drawPad();
connection.connect();
requestAnimationFrame(frame);
