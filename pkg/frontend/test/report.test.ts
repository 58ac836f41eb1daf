import { afterEach, describe, expect, it, vi } from "vitest";

import { fetchReportCsv } from "../src/api.js";
import { decodeCsvBytes, parseReportCsv } from "../src/csv.js";
import { renderReportTable } from "../src/table.js";
import { initApp, renderReport } from "../src/app.js";
import {
  TABLE5_BYTES,
  TABLE5_CSV,
  TABLE5_SUMMARY,
  completeJob,
  installMockApi,
  jsonResponse,
} from "./fixtures.js";

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = "";
});

describe("report view against the mocked API", () => {
  it("renders the 16:06 transition row with detected 1", async () => {
    installMockApi();
    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderReport(host, completeJob(), "");

    const rows = [...host.querySelectorAll(".report-row")].map((row) =>
      [...row.children].map((cell) => cell.textContent),
    );
    const transition = rows.find((cells) => cells[0] === "00:00:16:06");
    expect(transition).toBeDefined();
    expect(transition?.[3]).toBe("1");
    expect(transition?.[2]).toBe("0 days 0 hours 16 mins 6 secs");
    // The row before the transition is still bee-free.
    const before = rows.find((cells) => cells[0] === "00:00:16:05");
    expect(before?.[3]).toBe("0");
  });

  it("downloaded CSV is byte-identical to the mock's bytes", async () => {
    installMockApi();
    const host = document.createElement("div");
    document.body.appendChild(host);
    const job = completeJob();
    await renderReport(host, job, "");

    const link = host.querySelector<HTMLAnchorElement>("[data-testid=download-csv]");
    expect(link).not.toBeNull();
    expect(link?.getAttribute("href")).toBe(job.artifacts?.report_csv);
    // The link serves server bytes untouched; fetching through the client
    // returns the identical byte sequence.
    const bytes = await fetchReportCsv(job, "");
    expect(bytes.length).toBe(TABLE5_BYTES.length);
    expect(Array.from(bytes)).toEqual(Array.from(TABLE5_BYTES));
    expect(decodeCsvBytes(bytes)).toBe(TABLE5_CSV);
  });

  it("renders summary facts and the per-minute chart from the artifact", async () => {
    installMockApi();
    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderReport(host, completeJob(), "");

    expect(host.textContent).toContain("First detection: 00:00:16:06");
    expect(host.textContent).toContain("Seconds with bees: 6");
    const bars = host.querySelectorAll(".chart-bar");
    expect(bars).toHaveLength(2);
    expect(bars[1].getAttribute("data-minute")).toBe("16");
    expect(bars[1].getAttribute("data-value")).toBe("6");
  });

  it("shows the gallery with paging for detected frames", async () => {
    installMockApi();
    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderReport(host, completeJob(), "");
    const gallery = host.querySelector("[data-testid=gallery]");
    expect(gallery).not.toBeNull();
    expect(gallery?.querySelectorAll("img")).toHaveLength(6);
    expect(gallery?.querySelector("img")?.src).toContain("/api/jobs/job123/frames/0");
  });

  it("zero-detection job shows the empty state and a flat chart", async () => {
    const job = completeJob();
    installMockApi(job);
    const zeroCsv = new TextEncoder().encode(
      "D,H,M,S,Video Time,Time (formatted),DD_HH_MM_SS,Detected\n" +
        "0,0,0,0,0,0 days 0 hours 0 mins 0 secs,00:00:00:00,0\n",
    );
    const fetchMock = vi.mocked(globalThis.fetch);
    fetchMock.mockImplementation(async (input: RequestInfo | URL) => {
      const url = String(input);
      if (url.endsWith("/report.csv")) {
        return new Response(zeroCsv.buffer as ArrayBuffer, { status: 200 });
      }
      if (url.endsWith("/summary.json")) {
        return jsonResponse({
          ...TABLE5_SUMMARY,
          detection_seconds: 0,
          max_simultaneous: 0,
          first_detection: null,
          last_detection: null,
          per_minute_series: [[0, 0]],
        });
      }
      return jsonResponse(job);
    });
    const host = document.createElement("div");
    document.body.appendChild(host);
    await renderReport(host, job, "");
    expect(host.querySelector("[data-testid=empty-state]")).not.toBeNull();
    const bar = host.querySelector(".chart-bar");
    expect(bar?.getAttribute("data-value")).toBe("0");
    expect(bar?.getAttribute("height")).toBe("0");
  });

  it("partial jobs surface the truncation note prominently", async () => {
    vi.useFakeTimers();
    const partial = completeJob({ state: "partial", error: "decode failure at frame 35" });
    installMockApi(partial);
    const root = document.createElement("div");
    document.body.appendChild(root);
    initApp(root);

    const { createJobCard } = await import("../src/app.js");
    const card = createJobCard(partial, "", 1000);
    root.appendChild(card);
    expect(card.querySelector("[data-testid=job-note]")?.textContent).toContain(
      "decode failure at frame 35",
    );
    expect(card.querySelector("[data-testid=state-badge]")?.textContent).toBe("partial");
    vi.useRealTimers();
  });
});

describe("virtualized table", () => {
  it("keeps the DOM bounded for a 10,000-row report", () => {
    const header = "D,H,M,S,Video Time,Time (formatted),DD_HH_MM_SS,Detected";
    const lines = [header];
    for (let t = 0; t < 10_000; t += 1) {
      const m = Math.floor(t / 60) % 60;
      const h = Math.floor(t / 3600);
      const s = t % 60;
      const pad = (v: number): string => String(v).padStart(2, "0");
      lines.push(
        `0,${h},${m},${s},${t},0 days ${h} hours ${m} mins ${s} secs,00:${pad(h)}:${pad(m)}:${pad(s)},${t % 3 === 0 ? 1 : 0}`,
      );
    }
    const rows = parseReportCsv(lines.join("\n") + "\n");
    expect(rows).toHaveLength(10_000);

    const started = performance.now();
    const table = renderReportTable(rows);
    document.body.appendChild(table.root);
    const elapsed = performance.now() - started;

    expect(table.materializedRows()).toBeLessThan(60);
    expect(elapsed).toBeLessThan(1000);

    // Scrolling far down materializes a different bounded window.
    const viewport = table.root.querySelector<HTMLElement>(".report-table-viewport");
    expect(viewport).not.toBeNull();
    viewport!.scrollTop = 9000 * 26;
    viewport!.dispatchEvent(new Event("scroll"));
    expect(table.materializedRows()).toBeLessThan(60);
    const tops = [...viewport!.querySelectorAll<HTMLElement>(".report-row")].map(
      (el) => el.style.top,
    );
    expect(tops.some((top) => parseInt(top, 10) > 8900 * 26)).toBe(true);
  });
});

describe("upload flow", () => {
  it("valid clip produces a job card that reaches complete", async () => {
    vi.useFakeTimers();
    const job = completeJob();
    installMockApi(job);
    const root = document.createElement("div");
    document.body.appendChild(root);
    initApp(root, { pollIntervalMs: 10 });

    const input = root.querySelector<HTMLInputElement>("[data-testid=file-input]")!;
    const file = new File([new Uint8Array([9, 9])], "clip.synth.json");
    Object.defineProperty(input, "files", { value: [file] });
    root.querySelector<HTMLButtonElement>("[data-testid=submit]")!.click();
    await vi.advanceTimersByTimeAsync(5);

    const badge = root.querySelector("[data-testid=state-badge]");
    expect(badge?.textContent).toBe("queued");
    await vi.advanceTimersByTimeAsync(50);
    expect(badge?.textContent).toBe("complete");
    vi.useRealTimers();
  });

  it("oversize rejection shows inline error and no card", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "upload exceeds the 512 byte limit" }, 413)),
    );
    const root = document.createElement("div");
    document.body.appendChild(root);
    initApp(root);

    const input = root.querySelector<HTMLInputElement>("[data-testid=file-input]")!;
    Object.defineProperty(input, "files", { value: [new File([new Uint8Array(9)], "big.mp4")] });
    root.querySelector<HTMLButtonElement>("[data-testid=submit]")!.click();
    await vi.waitFor(() => {
      expect(root.querySelector("[data-testid=upload-error]")?.textContent).toBe(
        "upload exceeds the 512 byte limit",
      );
    });
    expect(root.querySelector(".job-card")).toBeNull();
  });
});
