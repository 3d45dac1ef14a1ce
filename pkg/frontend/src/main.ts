import { getJob, getSvg, listPortraits, postPreview, submitPortrait } from "./api.js";
import { captureFrame, startCamera } from "./camera.js";
import { describeJob, isTerminal, pollJob, type JobRecord } from "./jobs.js";
import {
  clampParams,
  DEFAULT_PARAMS,
  portraitConfig,
  previewQuery,
  type PortraitParams,
} from "./params.js";
import { PreviewLoop } from "./preview.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const video = $<HTMLVideoElement>("camera");
const overlay = $<HTMLImageElement>("preview-overlay");
const fileInput = $<HTMLInputElement>("file-input");
const fileRow = $<HTMLElement>("file-row");
const captureButton = $<HTMLButtonElement>("capture");
const statusLine = $<HTMLElement>("status");
const resultPane = $<HTMLElement>("result");
const galleryList = $<HTMLUListElement>("gallery");

const params: PortraitParams = { ...DEFAULT_PARAMS };
let uploadedFrame: Blob | null = null;
let cameraActive = false;
let capturing = false;
let jobRunning = false;

// Sliders hold raw positions; everything sent over the wire is clamped in
// params.ts. Labels show the clamped (effective) values, and all labels
// refresh together because clamping one field can move another (the low
// threshold follows the high one down).
const labelRefreshers: Array<() => void> = [];

function refreshLabels(): void {
  const effective = clampParams(params);
  for (const refresh of labelRefreshers) refresh.call(effective);
}

function bindSlider(
  id: string,
  key: "kernelSize" | "lowThreshold" | "highThreshold" | "colors" | "strokeSize" | "strokeCount",
  format: (v: number) => string
) {
  const input = $<HTMLInputElement>(id);
  const label = $<HTMLElement>(`${id}-value`);
  labelRefreshers.push(function (this: PortraitParams) {
    label.textContent = format(this[key]);
  });
  input.addEventListener("input", () => {
    params[key] = Number(input.value);
    refreshLabels();
  });
  params[key] = Number(input.value);
}

bindSlider("kernel", "kernelSize", (v) => `${v} px`);
bindSlider("low", "lowThreshold", (v) => v.toFixed(2));
bindSlider("high", "highThreshold", (v) => v.toFixed(2));
bindSlider("colors", "colors", (v) => String(v));
bindSlider("stroke-size", "strokeSize", (v) => `${v} mm`);
bindSlider("stroke-count", "strokeCount", (v) => String(v));
refreshLabels();

$<HTMLSelectElement>("page").addEventListener("change", (e) => {
  params.page = (e.target as HTMLSelectElement).value === "a4" ? "a4" : "a5";
});

const loop = new PreviewLoop(postPreview, (png) => {
  const url = URL.createObjectURL(png);
  const previous = overlay.src;
  overlay.src = url;
  overlay.hidden = false;
  if (previous.startsWith("blob:")) URL.revokeObjectURL(previous);
});

async function currentFrame(): Promise<Blob | null> {
  if (cameraActive) return captureFrame(video);
  return uploadedFrame;
}

async function previewTick(): Promise<void> {
  if (capturing) return;
  capturing = true;
  try {
    const frame = await currentFrame();
    if (frame) loop.offer(frame, previewQuery(params));
  } finally {
    capturing = false;
  }
}

fileInput.addEventListener("change", () => {
  uploadedFrame = fileInput.files?.[0] ?? null;
});

function setStatus(text: string, kind: "info" | "error" = "info") {
  statusLine.textContent = text;
  statusLine.className = kind === "error" ? "status error" : "status";
}

async function showSvg(id: string): Promise<void> {
  resultPane.innerHTML = await getSvg(id);
  const svg = resultPane.querySelector("svg");
  if (svg) enablePanZoom(svg);
}

/** Wheel zooms around the cursor, drag pans; plain CSS transform state. */
function enablePanZoom(svg: SVGSVGElement): void {
  let scale = 1;
  let tx = 0;
  let ty = 0;
  const apply = () => {
    svg.style.transform = `translate(${tx}px, ${ty}px) scale(${scale})`;
  };
  svg.style.transformOrigin = "0 0";
  resultPane.onwheel = (e) => {
    e.preventDefault();
    const factor = e.deltaY < 0 ? 1.1 : 1 / 1.1;
    const next = Math.min(20, Math.max(0.2, scale * factor));
    const rect = resultPane.getBoundingClientRect();
    const cx = e.clientX - rect.left;
    const cy = e.clientY - rect.top;
    tx = cx - ((cx - tx) * next) / scale;
    ty = cy - ((cy - ty) * next) / scale;
    scale = next;
    apply();
  };
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  resultPane.onpointerdown = (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    resultPane.setPointerCapture(e.pointerId);
  };
  resultPane.onpointermove = (e) => {
    if (!dragging) return;
    tx += e.clientX - lastX;
    ty += e.clientY - lastY;
    lastX = e.clientX;
    lastY = e.clientY;
    apply();
  };
  resultPane.onpointerup = () => {
    dragging = false;
  };
}

function galleryEntry(record: JobRecord): HTMLLIElement {
  const item = document.createElement("li");
  const when = record.created ? new Date(record.created).toLocaleString() : "";
  if (record.state === "done") {
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = `${record.id} — ${when}`;
    link.addEventListener("click", (e) => {
      e.preventDefault();
      showSvg(record.id).catch((err) => setStatus(String(err), "error"));
    });
    item.append(link);
  } else {
    item.textContent = `${record.id} — ${record.state}${when ? ` — ${when}` : ""}`;
  }
  return item;
}

async function refreshGallery(): Promise<void> {
  const records = await listPortraits();
  galleryList.replaceChildren(...records.map(galleryEntry));
}

captureButton.addEventListener("click", async () => {
  if (jobRunning) return;
  const frame = await currentFrame();
  if (!frame) {
    setStatus("No frame yet: allow the camera or choose a file.", "error");
    return;
  }
  jobRunning = true;
  captureButton.disabled = true;
  try {
    setStatus("Submitting…");
    const { id } = await submitPortrait(frame, portraitConfig(params));
    const final = await pollJob(getJob, id, (record) => {
      setStatus(describeJob(record), record.state === "failed" ? "error" : "info");
      if (isTerminal(record.state)) refreshGallery().catch(() => undefined);
    });
    if (final.state === "done") await showSvg(id);
  } catch (err) {
    setStatus(err instanceof Error ? err.message : String(err), "error");
  } finally {
    jobRunning = false;
    captureButton.disabled = false;
  }
});

async function init(): Promise<void> {
  const stream = await startCamera(video);
  cameraActive = stream !== null;
  if (!cameraActive) {
    video.hidden = true;
    fileRow.hidden = false;
    setStatus("Camera unavailable — upload a photo instead.");
  }
  window.setInterval(() => void previewTick(), 250);
  refreshGallery().catch(() => undefined);
}

void init();
