/**
 * Single-page interface: choose a video, submit it, watch the job
 * progress, then review the timestamp table, chart, and detected-frame
 * gallery. All state derives from server polling.
 */

import { ApiError, JobInfo, fetchReportCsv, fetchSummary, frameUrl, reportCsvUrl, submitVideo } from "./api.js";
import { decodeCsvBytes, parseReportCsv } from "./csv.js";
import { renderMinuteChart } from "./chart.js";
import { renderReportTable } from "./table.js";
import { pollJob } from "./poller.js";

const GALLERY_PAGE_SIZE = 8;

export interface AppOptions {
  base?: string;
  pollIntervalMs?: number;
}

export function initApp(root: HTMLElement, options: AppOptions = {}): void {
  const base = options.base ?? "";
  root.innerHTML = "";

  const heading = document.createElement("h1");
  heading.textContent = "Bee detection";
  root.appendChild(heading);

  const uploadCard = document.createElement("section");
  uploadCard.className = "upload-card";
  const fileInput = document.createElement("input");
  fileInput.type = "file";
  fileInput.accept = "video/*,.synth.json";
  fileInput.setAttribute("data-testid", "file-input");
  const submitButton = document.createElement("button");
  submitButton.textContent = "Detect bees";
  submitButton.setAttribute("data-testid", "submit");
  const uploadError = document.createElement("p");
  uploadError.className = "upload-error";
  uploadError.setAttribute("data-testid", "upload-error");
  uploadCard.append(fileInput, submitButton, uploadError);
  root.appendChild(uploadCard);

  const jobList = document.createElement("section");
  jobList.className = "job-list";
  root.appendChild(jobList);

  submitButton.addEventListener("click", () => {
    void (async () => {
      uploadError.textContent = "";
      const file = fileInput.files?.[0];
      if (!file) {
        uploadError.textContent = "Choose a video file first.";
        return;
      }
      try {
        const job = await submitVideo(file, base);
        jobList.prepend(createJobCard(job, base, options.pollIntervalMs ?? 1000));
      } catch (error) {
        // Surface the server's rejection reason verbatim; no card appears.
        uploadError.textContent = error instanceof ApiError ? error.message : String(error);
      }
    })();
  });
}

export function createJobCard(initial: JobInfo, base: string, pollIntervalMs: number): HTMLElement {
  const card = document.createElement("article");
  card.className = "job-card";
  card.setAttribute("data-job-id", initial.job_id);

  const title = document.createElement("h2");
  title.textContent = `Job ${initial.job_id}`;
  const badge = document.createElement("span");
  badge.className = "state-badge";
  badge.setAttribute("data-testid", "state-badge");
  const progress = document.createElement("progress");
  progress.max = 1;
  progress.setAttribute("data-testid", "progress");
  const note = document.createElement("p");
  note.className = "job-note";
  note.setAttribute("data-testid", "job-note");
  const reportHost = document.createElement("div");
  reportHost.className = "report-host";
  card.append(title, badge, progress, note, reportHost);

  let reportRendered = false;

  const update = (job: JobInfo): void => {
    badge.textContent = job.state + (badge.dataset.stale === "true" ? " (stale)" : "");
    badge.dataset.state = job.state;
    progress.value = job.progress;
    if (job.state === "failed") {
      note.textContent = `Failed: ${job.error ?? "unknown error"}`;
    } else if (job.state === "partial") {
      note.textContent = `Partial results — processing stopped early: ${job.error ?? "truncated"}`;
    } else {
      note.textContent = "";
    }
    if ((job.state === "complete" || job.state === "partial") && !reportRendered) {
      reportRendered = true;
      void renderReport(reportHost, job, base);
    }
  };

  const handle = pollJob(
    initial.job_id,
    update,
    (stale) => {
      badge.dataset.stale = String(stale);
      if (stale) badge.textContent = `${badge.dataset.state ?? "unknown"} (stale)`;
    },
    { base, intervalMs: pollIntervalMs },
  );
  card.addEventListener("beewatch:dispose", () => handle.stop());

  update(initial);
  return card;
}

export async function renderReport(host: HTMLElement, job: JobInfo, base: string): Promise<void> {
  host.innerHTML = "";
  try {
    const [summary, csvBytes] = await Promise.all([
      fetchSummary(job, base),
      fetchReportCsv(job, base),
    ]);
    const rows = parseReportCsv(decodeCsvBytes(csvBytes));

    const facts = document.createElement("ul");
    facts.className = "summary-facts";
    const factItems = [
      ["Seconds analyzed", String(summary.total_seconds)],
      ["Seconds with bees", String(summary.detection_seconds)],
      ["Max simultaneous", String(summary.max_simultaneous)],
      ["First detection", summary.first_detection ?? "none"],
      ["Last detection", summary.last_detection ?? "none"],
    ];
    for (const [label, value] of factItems) {
      const item = document.createElement("li");
      item.textContent = `${label}: ${value}`;
      facts.appendChild(item);
    }
    host.appendChild(facts);

    if (summary.detection_seconds === 0) {
      const empty = document.createElement("p");
      empty.className = "empty-state";
      empty.setAttribute("data-testid", "empty-state");
      empty.textContent = "No bees detected in this video.";
      host.appendChild(empty);
    }

    host.appendChild(renderMinuteChart(summary.per_minute_series));

    const table = renderReportTable(rows);
    table.root.setAttribute("data-testid", "report-table");
    host.appendChild(table.root);

    const download = document.createElement("a");
    download.href = reportCsvUrl(job, base);
    download.download = `report-${job.job_id}.csv`;
    download.textContent = "Download CSV";
    download.setAttribute("data-testid", "download-csv");
    host.appendChild(download);

    if (job.artifacts && job.artifacts.frames > 0) {
      host.appendChild(renderGallery(job, base));
    }
  } catch (error) {
    const failure = document.createElement("p");
    failure.className = "report-error";
    failure.textContent = `Could not load report: ${String(error)}`;
    host.appendChild(failure);
  }
}

export function renderGallery(job: JobInfo, base: string): HTMLElement {
  const frames = job.artifacts?.frames ?? 0;
  const gallery = document.createElement("section");
  gallery.className = "gallery";
  gallery.setAttribute("data-testid", "gallery");

  const grid = document.createElement("div");
  grid.className = "gallery-grid";
  const pager = document.createElement("div");
  pager.className = "gallery-pager";
  const prev = document.createElement("button");
  prev.textContent = "Prev";
  const label = document.createElement("span");
  const next = document.createElement("button");
  next.textContent = "Next";
  pager.append(prev, label, next);
  gallery.append(grid, pager);

  const pages = Math.max(1, Math.ceil(frames / GALLERY_PAGE_SIZE));
  let page = 0;

  const render = (): void => {
    grid.innerHTML = "";
    const start = page * GALLERY_PAGE_SIZE;
    for (let index = start; index < Math.min(frames, start + GALLERY_PAGE_SIZE); index += 1) {
      const img = document.createElement("img");
      img.loading = "lazy";
      img.src = frameUrl(job, index, base);
      img.alt = `Detected frame ${index}`;
      grid.appendChild(img);
    }
    label.textContent = `page ${page + 1} / ${pages}`;
    prev.disabled = page === 0;
    next.disabled = page >= pages - 1;
  };

  prev.addEventListener("click", () => {
    page = Math.max(0, page - 1);
    render();
  });
  next.addEventListener("click", () => {
    page = Math.min(pages - 1, page + 1);
    render();
  });
  render();
  return gallery;
}
