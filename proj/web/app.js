// Copyright 2026 The HME Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Live client: mouse-driven hand stream out, robot predictions in.

export const PROTOCOL = 1;
export const FRAME_PERIOD_MS = 25;
export const LINKS = [0.30, 0.25, 0.15];
export const WRIST_LINKS = [0.06, 0.04];
export const ACTIONS = ["hand_shake", "hand_wave", "parachute", "rocket"];

// Minimal JSON-schema check for the keywords the protocol schema uses.
export function validate(schema, node, value, root = schema) {
  if (node.$ref) return validate(schema, resolveRef(root, node.$ref), value, root);
  if (node.oneOf) {
    const hits = node.oneOf.filter((s) => validate(schema, s, value, root));
    return hits.length === 1;
  }
  if ("const" in node && value !== node.const) return false;
  if (node.enum && !node.enum.includes(value)) return false;
  if (node.type && !hasType(node.type, value)) return false;
  if (typeof value === "number") {
    if (node.minimum !== undefined && value < node.minimum) return false;
    if (node.maximum !== undefined && value > node.maximum) return false;
  }
  if (Array.isArray(value)) {
    if (node.minItems !== undefined && value.length < node.minItems) return false;
    if (node.maxItems !== undefined && value.length > node.maxItems) return false;
    if (node.items && !value.every((v) => validate(schema, node.items, v, root))) return false;
  }
  if (isObject(value)) {
    for (const k of node.required ?? []) if (!(k in value)) return false;
    const props = node.properties ?? {};
    for (const [k, v] of Object.entries(value)) {
      if (k in props) {
        if (!validate(schema, props[k], v, root)) return false;
      } else if (node.additionalProperties === false) {
        return false;
      }
    }
  }
  return true;
}

function resolveRef(root, ref) {
  return ref.replace(/^#\//, "").split("/").reduce((n, k) => n[k], root);
}

function isObject(v) {
  return v !== null && typeof v === "object" && !Array.isArray(v);
}

function hasType(type, v) {
  switch (type) {
    case "object": return isObject(v);
    case "array": return Array.isArray(v);
    case "string": return typeof v === "string";
    case "boolean": return typeof v === "boolean";
    case "integer": return Number.isInteger(v);
    case "number": return typeof v === "number" && Number.isFinite(v);
    default: return false;
  }
}

// Mouse samples in, 40 Hz frames out. Linear interpolation between samples; when the
// mouse is idle the last position repeats and the frame is flagged held.
export class Resampler {
  constructor() {
    this.next = null;
    this.last = null;
  }

  reset() {
    this.next = null;
    this.last = null;
  }

  // Adds a sample at time t (ms) and returns the frames due up to t.
  push(t, x, y) {
    const out = [];
    if (this.last === null) {
      this.last = { t, x, y };
      this.next = t + FRAME_PERIOD_MS;
      out.push({ t_ms: Math.round(t), x, y, held: false });
      return out;
    }
    if (t <= this.last.t) return out;
    const a = this.last;
    for (; this.next <= t; this.next += FRAME_PERIOD_MS) {
      const u = (this.next - a.t) / (t - a.t);
      out.push({ t_ms: Math.round(this.next), x: a.x + u * (x - a.x), y: a.y + u * (y - a.y), held: false });
    }
    this.last = { t, x, y };
    return out;
  }

  // Called from the tick loop; repeats the last position for frames the mouse left empty.
  idle(t) {
    const out = [];
    if (this.last === null) return out;
    for (; this.next <= t; this.next += FRAME_PERIOD_MS)
      out.push({ t_ms: Math.round(this.next), x: this.last.x, y: this.last.y, held: true });
    return out;
  }
}

// Planar chain from joints 1-3; the base sits at the origin, angle 0 points along +x.
export function armPoints(robotFrame) {
  const pts = [[0, 0]];
  let a = 0;
  let x = 0;
  let y = 0;
  for (let i = 0; i < LINKS.length; i++) {
    a += robotFrame[i];
    x += LINKS[i] * Math.cos(a);
    y += LINKS[i] * Math.sin(a);
    pts.push([x, y]);
  }
  for (let i = 0; i < WRIST_LINKS.length; i++) {
    a += robotFrame[3 + i];
    x += WRIST_LINKS[i] * Math.cos(a);
    y += WRIST_LINKS[i] * Math.sin(a);
    pts.push([x, y]);
  }
  return pts;
}

// Everything the canvas draws, as plain data.
export function scene(message, trace) {
  return {
    arm: armPoints(message.robot_frame),
    ghost: message.robot_window.map((f, i) => ({ tip: armPoints(f)[LINKS.length], alpha: 1 - i / message.robot_window.length })),
    human: message.human_window_hand_xy.map(([x, y]) => ({ x, y })),
    dials: message.robot_frame.slice(LINKS.length),
    trace: trace.slice(-120),
    stale: message.stale,
  };
}

// Connection state machine: idle -> connecting -> open -> (closed | reconnecting).
export class Session {
  constructor(schema, { connect, onState = () => {} }) {
    this.schema = schema;
    this.connect = connect;
    this.onState = onState;
    this.state = "idle";
    this.queue = [];
    this.latest = null;
    this.latency = null;
    this.errors = 0;
    this.sent = new Map();
    this.socket = null;
    this.action = ACTIONS[0];
  }

  setState(s) {
    this.state = s;
    this.onState(s);
  }

  open(action) {
    this.action = action;
    this.queue = [];
    this.setState("connecting");
    this.socket = this.connect();
    this.socket.onopen = () => this.send({ type: "hello", protocol: PROTOCOL, action });
    this.socket.onmessage = (ev) => this.receive(ev.data, performanceNow());
    this.socket.onclose = () => {
      this.queue = [];
      this.sent.clear();
      this.setState(this.state === "closing" ? "closed" : "reconnecting");
    };
  }

  close() {
    if (!this.socket) return;
    if (this.state === "open") this.send({ type: "bye" });
    this.setState("closing");
    this.socket.close();
  }

  send(msg) {
    if (!validate(this.schema, this.schema.$defs.client_message, msg)) throw new Error(`refusing to send ${JSON.stringify(msg)}`);
    this.socket.send(JSON.stringify(msg));
  }

  frame(f) {
    const msg = { type: "frame", t_ms: f.t_ms, hand_xy: [clamp01(f.x), clamp01(f.y)] };
    if (this.state !== "open") {
      if (this.state === "connecting") this.queue.push(msg);
      return;
    }
    this.sent.set(msg.t_ms, performanceNow());
    this.send(msg);
  }

  receive(text, now) {
    let msg;
    try {
      msg = JSON.parse(text);
    } catch {
      this.errors++;
      return;
    }
    if (!validate(this.schema, this.schema.$defs.server_message, msg)) {
      this.errors++;
      return;
    }
    if (msg.type === "hello_ack") {
      this.setState("open");
      for (const q of this.queue.splice(0)) this.frame({ t_ms: q.t_ms, x: q.hand_xy[0], y: q.hand_xy[1] });
    } else if (msg.type === "prediction") {
      const t0 = this.sent.get(msg.t_ms);
      if (t0 !== undefined) {
        this.latency = now - t0;
        this.sent.delete(msg.t_ms);
      }
      this.latest = msg;
    } else {
      this.errors++;
    }
  }
}

function clamp01(v) {
  return Math.min(1, Math.max(0, v));
}

function performanceNow() {
  return globalThis.performance ? globalThis.performance.now() : Date.now();
}

function draw(ctx, view) {
  const { width: W, height: H } = ctx.canvas;
  ctx.clearRect(0, 0, W, H);
  const s = Math.min(W, H) / 1.8;
  const ox = W * 0.35;
  const oy = H * 0.55;
  const px = ([x, y]) => [ox + s * x, oy - s * y];

  ctx.strokeStyle = "#9ab";
  ctx.beginPath();
  view.trace.forEach((p, i) => (i ? ctx.lineTo(p.x * W, p.y * H) : ctx.moveTo(p.x * W, p.y * H)));
  ctx.stroke();

  ctx.fillStyle = "#3a7";
  for (const h of view.human) ctx.fillRect(h.x * W - 2, h.y * H - 2, 4, 4);

  for (const g of view.ghost) {
    ctx.fillStyle = `rgba(200, 80, 40, ${0.6 * g.alpha})`;
    const [x, y] = px(g.tip);
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }

  ctx.strokeStyle = view.stale ? "#c90" : "#222";
  ctx.lineWidth = 6;
  ctx.beginPath();
  view.arm.forEach((p, i) => (i ? ctx.lineTo(...px(p)) : ctx.moveTo(...px(p))));
  ctx.stroke();
  ctx.lineWidth = 1;

  view.dials.forEach((a, i) => {
    const cx = W - 40 - 60 * i;
    const cy = 40;
    ctx.strokeStyle = "#555";
    ctx.beginPath();
    ctx.arc(cx, cy, 20, 0, 2 * Math.PI);
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + 20 * Math.cos(a), cy - 20 * Math.sin(a));
    ctx.stroke();
  });
}

async function main() {
  const schema = await (await fetch("protocol.schema.json")).json();
  const canvas = document.getElementById("stage");
  const ctx = canvas.getContext("2d");
  const status = document.getElementById("status");
  const select = document.getElementById("action");
  const resampler = new Resampler();
  const trace = [];
  const session = new Session(schema, {
    connect: () => new WebSocket(`ws://${location.host}/live`),
    onState: (s) => {
      status.dataset.state = s;
      if (s === "reconnecting") {
        resampler.reset();
        setTimeout(() => session.open(select.value), 1000);
      }
    },
  });
  for (const a of ACTIONS) select.add(new Option(a.replace("_", " "), a));
  select.addEventListener("change", () => {
    session.close();
    resampler.reset();
    session.open(select.value);
  });

  const emit = (frames) => {
    for (const f of frames) {
      trace.push({ x: f.x, y: f.y });
      if (trace.length > 400) trace.shift();
      session.frame(f);
    }
  };
  canvas.addEventListener("pointermove", (ev) => {
    const r = canvas.getBoundingClientRect();
    emit(resampler.push(ev.timeStamp, (ev.clientX - r.left) / r.width, (ev.clientY - r.top) / r.height));
  });

  const tick = (now) => {
    emit(resampler.idle(now - FRAME_PERIOD_MS));
    if (session.latest) draw(ctx, scene(session.latest, trace));
    const lat = session.latency === null ? "-" : `${session.latency.toFixed(1)} ms`;
    status.textContent = `${session.state} | latency ${lat} | ${session.latest?.stale ? "stale" : "live"} | errors ${session.errors}`;
    requestAnimationFrame(tick);
  };
  session.open(select.value);
  requestAnimationFrame(tick);
}

if (typeof window !== "undefined" && typeof document !== "undefined") main();
