import { describe, expect, it } from "vitest";
import { describeJob, isTerminal, pollJob, type JobRecord, type JobState } from "../src/jobs.js";

function record(state: JobState, extra: Partial<JobRecord> = {}): JobRecord {
  return {
    id: "j1",
    state,
    stage: null,
    error: null,
    stats: null,
    created: "2026-01-01T00:00:00Z",
    updated: "2026-01-01T00:00:00Z",
    ...extra,
  };
}

/** getJob stub that replays a fixed sequence of records (or throws). */
function scripted(sequence: Array<JobRecord | Error>) {
  let i = 0;
  const calls: number[] = [];
  const getJob = async (_id: string): Promise<JobRecord> => {
    calls.push(i);
    const item = sequence[Math.min(i, sequence.length - 1)];
    i += 1;
    if (item instanceof Error) throw item;
    return item;
  };
  return { getJob, calls };
}

describe("pollJob", () => {
  it("reports every state until the job is done", async () => {
    const seen: string[] = [];
    const sleeps: number[] = [];
    const { getJob } = scripted([
      record("queued"),
      record("running", { stage: "edges" }),
      record("running", { stage: "shading" }),
      record("done", { stats: { paths: 141 } }),
    ]);

    const final = await pollJob(getJob, "j1", (r) => seen.push(`${r.state}:${r.stage ?? "-"}`), {
      intervalMs: 1000,
      sleep: async (ms) => {
        sleeps.push(ms);
      },
    });

    expect(seen).toEqual(["queued:-", "running:edges", "running:shading", "done:-"]);
    expect(final.state).toBe("done");
    expect(final.stats).toEqual({ paths: 141 });
    // One sleep between each fetch, none after the terminal record.
    expect(sleeps).toEqual([1000, 1000, 1000]);
  });

  it("stops on failure and surfaces the server's error text verbatim", async () => {
    const { getJob } = scripted([
      record("running", { stage: "edges" }),
      record("failed", { error: "image has no dark region to shade" }),
    ]);
    const updates: JobRecord[] = [];
    const final = await pollJob(getJob, "j1", (r) => updates.push(r), {
      sleep: async () => undefined,
    });
    expect(final.state).toBe("failed");
    expect(final.error).toBe("image has no dark region to shade");
    expect(updates).toHaveLength(2);
  });

  it("turns a fetch error into a failed record instead of throwing", async () => {
    const { getJob } = scripted([new Error("portrait not found")]);
    const updates: JobRecord[] = [];
    const final = await pollJob(getJob, "j1", (r) => updates.push(r), {
      sleep: async () => undefined,
    });
    expect(final.state).toBe("failed");
    expect(final.error).toBe("portrait not found");
    expect(updates).toEqual([final]);
  });

  it("defaults to one-second polling", async () => {
    const sleeps: number[] = [];
    const { getJob } = scripted([record("queued"), record("done")]);
    await pollJob(getJob, "j1", () => undefined, {
      sleep: async (ms) => {
        sleeps.push(ms);
      },
    });
    expect(sleeps).toEqual([1000]);
  });
});

describe("isTerminal", () => {
  it("is true exactly for done and failed", () => {
    expect(isTerminal("queued")).toBe(false);
    expect(isTerminal("running")).toBe(false);
    expect(isTerminal("done")).toBe(true);
    expect(isTerminal("failed")).toBe(true);
  });
});

describe("describeJob", () => {
  it("formats each state for the status line", () => {
    expect(describeJob(record("queued"))).toBe("Waiting in queue…");
    expect(describeJob(record("running", { stage: "planning" }))).toBe("Working: planning");
    expect(describeJob(record("running"))).toBe("Working…");
    expect(describeJob(record("done"))).toBe("Done");
    expect(describeJob(record("failed", { error: "boom" }))).toBe("Failed: boom");
    expect(describeJob(record("failed"))).toBe("Failed");
  });
});
