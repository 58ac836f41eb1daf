/** Shared mock API serving a fixed report: the 13-row excerpt where a bee
 * enters view at 00:00:16:06, plus job/summary payloads shaped like the
 * server's. */

import { vi } from "vitest";
import type { JobInfo, ReportSummary } from "../src/api.js";

export const TABLE5_CSV =
  "D,H,M,S,Video Time,Time (formatted),DD_HH_MM_SS,Detected\n" +
  [...Array(13).keys()]
    .map((offset) => {
      const t = 959 + offset;
      const m = Math.floor(t / 60);
      const s = t % 60;
      const detected = t >= 966 ? 1 : 0;
      const mm = String(m).padStart(2, "0");
      const ss = String(s).padStart(2, "0");
      return `0,0,${m},${s},${t},0 days 0 hours ${m} mins ${s} secs,00:00:${mm}:${ss},${detected}`;
    })
    .join("\n") + "\n";

export const TABLE5_BYTES = new TextEncoder().encode(TABLE5_CSV);

export function completeJob(overrides: Partial<JobInfo> = {}): JobInfo {
  return {
    job_id: "job123",
    state: "complete",
    progress: 1.0,
    submitted_at: "2026-08-08T10:00:00.000+00:00",
    finished_at: "2026-08-08T10:00:09.000+00:00",
    error: null,
    artifacts: {
      report_csv: "/api/jobs/job123/report.csv",
      summary_json: "/api/jobs/job123/summary.json",
      frames: 6,
    },
    ...overrides,
  };
}

export const TABLE5_SUMMARY: ReportSummary = {
  total_seconds: 13,
  detection_seconds: 6,
  max_simultaneous: 1,
  first_detection: "00:00:16:06",
  last_detection: "00:00:16:11",
  per_minute_series: [
    [15, 0],
    [16, 6],
  ],
};

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function csvResponse(bytes: Uint8Array): Response {
  const body = new Uint8Array(bytes);
  return new Response(body.buffer as ArrayBuffer, {
    status: 200,
    headers: { "Content-Type": "text/csv" },
  });
}

/** fetch stub routing the mock endpoints for one complete job. */
export function installMockApi(job: JobInfo = completeJob()): ReturnType<typeof vi.fn> {
  const mock = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    if (url.endsWith("/api/jobs") && init?.method === "POST") {
      return jsonResponse({ ...job, state: "queued", progress: 0, artifacts: null });
    }
    if (url.endsWith(`/api/jobs/${job.job_id}`)) {
      return jsonResponse(job);
    }
    if (url.endsWith("/report.csv")) {
      return csvResponse(TABLE5_BYTES);
    }
    if (url.endsWith("/summary.json")) {
      return jsonResponse(TABLE5_SUMMARY);
    }
    if (url.includes("/frames/")) {
      return new Response(new Uint8Array([137, 80, 78, 71]), {
        status: 200,
        headers: { "Content-Type": "image/png" },
      });
    }
    return jsonResponse({ detail: `no mock route for ${url}` }, 404);
  });
  vi.stubGlobal("fetch", mock);
  return mock;
}
