/** Thin fetch client for the portrait service. Same-origin paths: the
 * service serves these assets itself. */

import type { JobRecord } from "./jobs.js";

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // Not JSON; fall through to the status line.
  }
  return `${response.status} ${response.statusText}`;
}

export async function postPreview(frame: Blob, query: string): Promise<Blob> {
  const response = await fetch(`/preview?${query}`, { method: "POST", body: frame });
  if (!response.ok) throw new Error(await errorDetail(response));
  return response.blob();
}

export async function submitPortrait(
  frame: Blob,
  config: Record<string, unknown>
): Promise<{ id: string }> {
  const form = new FormData();
  form.append("image", frame, "frame.png");
  form.append("config", JSON.stringify(config));
  const response = await fetch("/portraits", { method: "POST", body: form });
  if (!response.ok) throw new Error(await errorDetail(response));
  return response.json();
}

export async function getJob(id: string): Promise<JobRecord> {
  const response = await fetch(`/portraits/${id}`);
  if (!response.ok) throw new Error(await errorDetail(response));
  return response.json();
}

export async function listPortraits(): Promise<JobRecord[]> {
  const response = await fetch("/portraits");
  if (!response.ok) throw new Error(await errorDetail(response));
  const body = await response.json();
  return body.portraits ?? [];
}

export function svgUrl(id: string): string {
  return `/portraits/${id}/svg`;
}

export async function getSvg(id: string): Promise<string> {
  const response = await fetch(svgUrl(id));
  if (!response.ok) throw new Error(await errorDetail(response));
  return response.text();
}
