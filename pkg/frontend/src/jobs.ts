/** Portrait job polling against GET /portraits/{id}. */

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobRecord {
  id: string;
  state: JobState;
  stage: string | null;
  error: string | null;
  stats: Record<string, number> | null;
  created: string;
  updated: string;
}

export interface PollOptions {
  intervalMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export function isTerminal(state: JobState): boolean {
  return state === "done" || state === "failed";
}

/**
 * Poll a job until it reaches a terminal state. Every fetched record is
 * passed to onUpdate (stage progress display); the terminal record is also
 * returned. Fetch errors end the poll as a synthetic failed record so the
 * caller has one code path for showing what went wrong.
 */
export async function pollJob(
  getJob: (id: string) => Promise<JobRecord>,
  id: string,
  onUpdate: (record: JobRecord) => void,
  options: PollOptions = {}
): Promise<JobRecord> {
  const intervalMs = options.intervalMs ?? 1000;
  const sleep = options.sleep ?? defaultSleep;
  for (;;) {
    let record: JobRecord;
    try {
      record = await getJob(id);
    } catch (err) {
      record = {
        id,
        state: "failed",
        stage: null,
        error: err instanceof Error ? err.message : String(err),
        stats: null,
        created: "",
        updated: "",
      };
    }
    onUpdate(record);
    if (isTerminal(record.state)) return record;
    await sleep(intervalMs);
  }
}

/** Human-readable one-liner for the status area. */
export function describeJob(record: JobRecord): string {
  switch (record.state) {
    case "queued":
      return "Waiting in queue…";
    case "running":
      return record.stage ? `Working: ${record.stage}` : "Working…";
    case "done":
      return "Done";
    case "failed":
      return record.error ? `Failed: ${record.error}` : "Failed";
  }
}
