import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, fetchReportCsv, getJob, reportCsvUrl, submitVideo } from "../src/api.js";
import { TABLE5_BYTES, completeJob, csvResponse, installMockApi, jsonResponse } from "./fixtures.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("submitVideo", () => {
  it("posts multipart form data with the video field", async () => {
    const mock = installMockApi();
    const file = new File([new Uint8Array([1, 2, 3])], "clip.mp4", { type: "video/mp4" });
    const job = await submitVideo(file);
    expect(job.state).toBe("queued");
    const [url, init] = mock.mock.calls[0];
    expect(String(url)).toBe("/api/jobs");
    expect(init?.method).toBe("POST");
    expect((init?.body as FormData).get("video")).toBeInstanceOf(File);
  });

  it("surfaces the server rejection reason verbatim", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "upload exceeds the 512 byte limit" }, 413)),
    );
    const file = new File([new Uint8Array(1024)], "big.mp4");
    await expect(submitVideo(file)).rejects.toMatchObject({
      message: "upload exceeds the 512 byte limit",
      status: 413,
    });
  });
});

describe("getJob", () => {
  it("returns the job snapshot", async () => {
    installMockApi();
    const job = await getJob("job123");
    expect(job.job_id).toBe("job123");
    expect(job.artifacts?.frames).toBe(6);
  });

  it("raises ApiError on 404", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => jsonResponse({ detail: "unknown job nope" }, 404)));
    await expect(getJob("nope")).rejects.toBeInstanceOf(ApiError);
  });
});

describe("fetchReportCsv", () => {
  it("returns the exact bytes the server sent", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => csvResponse(TABLE5_BYTES)));
    const bytes = await fetchReportCsv(completeJob());
    expect(Array.from(bytes)).toEqual(Array.from(TABLE5_BYTES));
  });

  it("refuses jobs without artifacts", () => {
    expect(() => reportCsvUrl(completeJob({ artifacts: null }))).toThrow(ApiError);
  });
});
