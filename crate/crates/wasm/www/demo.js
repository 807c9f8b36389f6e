import init, { Demo } from "./pkg/ctxscope_wasm.js";

const $ = (id) => document.getElementById(id);
const canvas = $("map");
const ctx = canvas.getContext("2d");
const PALETTE = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7", "#9c755f"];

let demo = null;
let topics = [];
let layout = null;
let highlighted = null; // Set of item ids, or null when nothing is retrieved

function setStatus(text) {
  $("status").textContent = text;
}

function draw() {
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  if (!layout) return;
  for (const cell of layout.cells) {
    ctx.strokeStyle = "#999";
    ctx.lineWidth = cell.topic_id === layout.expanded_topic ? 2 : 1;
    ctx.strokeRect(cell.x * w, cell.y * h, cell.w * w, cell.h * h);
  }
  for (const p of layout.placements) {
    const on = highlighted === null || highlighted.has(p.item_id);
    ctx.globalAlpha = on ? 1 : 0.15;
    ctx.fillStyle = PALETTE[p.topic_id % PALETTE.length];
    ctx.beginPath();
    ctx.arc(p.position[0] * w, p.position[1] * h, Math.max(p.radius * Math.min(w, h), 1), 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#111";
  ctx.font = "12px system-ui";
  for (const cell of layout.cells) {
    const t = topics.find((t) => t.id === cell.topic_id);
    const pad = 4;
    ctx.save();
    ctx.beginPath();
    ctx.rect(cell.x * w, cell.y * h, cell.w * w, cell.h * h);
    ctx.clip();
    ctx.fillStyle = "rgba(255,255,255,0.8)";
    const text = t ? t.label : `topic ${cell.topic_id}`;
    ctx.fillRect(cell.x * w + 1, cell.y * h + 1, ctx.measureText(text).width + 2 * pad, 16);
    ctx.fillStyle = "#111";
    ctx.fillText(text, cell.x * w + pad, cell.y * h + 13);
    ctx.restore();
  }
}

function renderTopics(counts) {
  $("topics").innerHTML = "";
  for (const t of topics) {
    const li = document.createElement("li");
    li.style.color = PALETTE[t.id % PALETTE.length];
    li.textContent = counts ? `${t.label} (${counts[t.id]} of ${t.size})` : `${t.label} (${t.size})`;
    $("topics").appendChild(li);
  }
}

function setLayout(expanded) {
  layout = JSON.parse(demo.layout(expanded));
  draw();
}

function build() {
  setStatus("building…");
  $("build").disabled = true;
  // let the status paint before the synchronous build
  setTimeout(() => {
    try {
      const started = performance.now();
      demo = new Demo(Number($("seed").value), Number($("employees").value), Number($("items").value));
      topics = JSON.parse(demo.topics());
      highlighted = null;
      $("hits").innerHTML = "";
      renderTopics(null);
      setLayout(-1);
      for (const id of ["prompt", "ask", "clear"]) $(id).disabled = false;
      setStatus(`built in ${Math.round(performance.now() - started)} ms`);
    } catch (e) {
      setStatus(`error: ${e.message ?? e}`);
    } finally {
      $("build").disabled = false;
    }
  }, 10);
}

function ask(event) {
  event.preventDefault();
  const prompt = $("prompt").value || $("prompt").placeholder;
  try {
    const result = JSON.parse(demo.retrieve(prompt, Number($("alpha").value)));
    highlighted = new Set(result.hits.map((h) => h.item_id));
    renderTopics(result.topic_counts);
    $("hits").innerHTML = "";
    for (const hit of result.hits) {
      const li = document.createElement("li");
      li.textContent = `${hit.title} (${hit.score.toFixed(3)})`;
      li.style.color = PALETTE[hit.topic_id % PALETTE.length];
      $("hits").appendChild(li);
    }
    draw();
  } catch (e) {
    setStatus(`error: ${e.message ?? e}`);
  }
}

canvas.addEventListener("click", (event) => {
  if (!layout) return;
  const rect = canvas.getBoundingClientRect();
  const x = (event.clientX - rect.left) / rect.width;
  const y = (event.clientY - rect.top) / rect.height;
  const cell = layout.cells.find((c) => x >= c.x && x <= c.x + c.w && y >= c.y && y <= c.y + c.h);
  if (!cell) return;
  setLayout(cell.topic_id === layout.expanded_topic ? -1 : cell.topic_id);
});

$("build").addEventListener("click", build);
$("query").addEventListener("submit", ask);
$("clear").addEventListener("click", () => {
  highlighted = null;
  $("hits").innerHTML = "";
  renderTopics(null);
  draw();
});
$("alpha").addEventListener("input", () => ($("alpha-value").textContent = $("alpha").value));

await init();
build();
