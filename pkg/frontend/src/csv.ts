/**
 * Display-side parsing of the server's report CSV. The server bytes stay
 * the source of truth; this only splits them into cells for the table.
 */

export interface ReportRow {
  d: number;
  h: number;
  m: number;
  s: number;
  videoTime: number;
  timeFormatted: string;
  ddHhMmSs: string;
  detected: number;
}

export const REPORT_HEADER = "D,H,M,S,Video Time,Time (formatted),DD_HH_MM_SS,Detected";

export function parseReportCsv(text: string): ReportRow[] {
  const lines = text.split("\n");
  if (lines[0] !== REPORT_HEADER) {
    throw new Error(`unexpected report header: ${lines[0] ?? ""}`);
  }
  const rows: ReportRow[] = [];
  for (const line of lines.slice(1)) {
    if (!line) continue;
    const cells = line.split(",");
    if (cells.length !== 8) throw new Error(`malformed report line: ${line}`);
    rows.push({
      d: Number(cells[0]),
      h: Number(cells[1]),
      m: Number(cells[2]),
      s: Number(cells[3]),
      videoTime: Number(cells[4]),
      timeFormatted: cells[5],
      ddHhMmSs: cells[6],
      detected: Number(cells[7]),
    });
  }
  return rows;
}

export function decodeCsvBytes(bytes: Uint8Array): string {
  return new TextDecoder("utf-8").decode(bytes);
}
