/**
 * Job status polling: 1 s cadence, exponential backoff on network errors
 * with the card marked stale until a poll succeeds again. Polling stops on
 * its own once the job reaches a terminal state.
 */

import { JobInfo, TERMINAL_STATES, getJob } from "./api.js";

export interface PollOptions {
  base?: string;
  intervalMs?: number;
  maxBackoffMs?: number;
}

export interface PollHandle {
  stop(): void;
}

export function pollJob(
  jobId: string,
  onUpdate: (job: JobInfo) => void,
  onStale: (stale: boolean) => void,
  options: PollOptions = {},
): PollHandle {
  const base = options.base ?? "";
  const interval = options.intervalMs ?? 1000;
  const maxBackoff = options.maxBackoffMs ?? 30_000;
  let delay = interval;
  let stopped = false;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const tick = async (): Promise<void> => {
    if (stopped) return;
    try {
      const job = await getJob(jobId, base);
      delay = interval;
      onStale(false);
      onUpdate(job);
      if (TERMINAL_STATES.has(job.state)) return;
    } catch {
      delay = Math.min(delay * 2, maxBackoff);
      onStale(true);
    }
    if (!stopped) timer = setTimeout(tick, delay);
  };

  timer = setTimeout(tick, delay);
  return {
    stop(): void {
      stopped = true;
      if (timer !== null) clearTimeout(timer);
    },
  };
}
