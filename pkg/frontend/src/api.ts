/**
 * Typed client for the detection service API.
 *
 * Every displayed number in the UI originates from these server artifacts;
 * the client never computes detection metrics itself.
 */

export type JobState = "queued" | "processing" | "complete" | "failed" | "partial";

export interface JobArtifacts {
  report_csv: string;
  summary_json: string;
  frames: number;
}

export interface JobInfo {
  job_id: string;
  state: JobState;
  progress: number;
  submitted_at: string;
  finished_at: string | null;
  error: string | null;
  artifacts: JobArtifacts | null;
}

export interface ReportSummary {
  total_seconds: number;
  detection_seconds: number;
  max_simultaneous: number;
  first_detection: string | null;
  last_detection: string | null;
  per_minute_series: [number, number][];
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

export const TERMINAL_STATES: ReadonlySet<JobState> = new Set(["complete", "failed", "partial"]);

async function jsonOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status} ${response.statusText}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export async function submitVideo(file: File, base = ""): Promise<JobInfo> {
  const form = new FormData();
  form.append("video", file, file.name);
  return jsonOrThrow<JobInfo>(await fetch(`${base}/api/jobs`, { method: "POST", body: form }));
}

export async function getJob(jobId: string, base = ""): Promise<JobInfo> {
  return jsonOrThrow<JobInfo>(await fetch(`${base}/api/jobs/${jobId}`));
}

export function reportCsvUrl(job: JobInfo, base = ""): string {
  if (!job.artifacts) throw new ApiError("artifacts not ready", 409);
  return `${base}${job.artifacts.report_csv}`;
}

export function frameUrl(job: JobInfo, index: number, base = ""): string {
  return `${base}/api/jobs/${job.job_id}/frames/${index}`;
}

/** Raw CSV bytes, exactly as the server serves them. */
export async function fetchReportCsv(job: JobInfo, base = ""): Promise<Uint8Array> {
  const response = await fetch(reportCsvUrl(job, base));
  if (!response.ok) throw new ApiError(`report fetch failed (${response.status})`, response.status);
  return new Uint8Array(await response.arrayBuffer());
}

export async function fetchSummary(job: JobInfo, base = ""): Promise<ReportSummary> {
  if (!job.artifacts) throw new ApiError("artifacts not ready", 409);
  return jsonOrThrow<ReportSummary>(await fetch(`${base}${job.artifacts.summary_json}`));
}
