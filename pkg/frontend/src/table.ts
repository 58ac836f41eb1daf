/**
 * Windowed table renderer: only the rows near the viewport exist in the
 * DOM, so ten-thousand-row reports stay responsive.
 */

import { ReportRow } from "./csv.js";

const ROW_HEIGHT = 26;
const OVERSCAN = 8;

export interface VirtualTable {
  root: HTMLElement;
  /** Number of row elements currently materialized (test hook). */
  materializedRows(): number;
  refresh(): void;
}

export function renderReportTable(rows: ReportRow[], viewportHeight = 420): VirtualTable {
  const root = document.createElement("div");
  root.className = "report-table";

  const header = document.createElement("div");
  header.className = "report-table-header report-row";
  for (const label of ["Time", "Video Time", "Formatted", "Detected"]) {
    const cell = document.createElement("span");
    cell.textContent = label;
    header.appendChild(cell);
  }
  root.appendChild(header);

  const viewport = document.createElement("div");
  viewport.className = "report-table-viewport";
  viewport.style.height = `${viewportHeight}px`;
  viewport.style.overflowY = "auto";
  viewport.style.position = "relative";

  const spacer = document.createElement("div");
  spacer.style.height = `${rows.length * ROW_HEIGHT}px`;
  spacer.style.position = "relative";
  viewport.appendChild(spacer);
  root.appendChild(viewport);

  const materialized = new Map<number, HTMLElement>();

  const renderWindow = (): void => {
    const first = Math.max(0, Math.floor(viewport.scrollTop / ROW_HEIGHT) - OVERSCAN);
    const visible = Math.ceil(viewportHeight / ROW_HEIGHT) + 2 * OVERSCAN;
    const last = Math.min(rows.length, first + visible);

    for (const [index, element] of materialized) {
      if (index < first || index >= last) {
        element.remove();
        materialized.delete(index);
      }
    }
    for (let index = first; index < last; index += 1) {
      if (materialized.has(index)) continue;
      const row = rows[index];
      const element = document.createElement("div");
      element.className = "report-row" + (row.detected > 0 ? " detected" : "");
      element.style.position = "absolute";
      element.style.top = `${index * ROW_HEIGHT}px`;
      element.style.height = `${ROW_HEIGHT}px`;
      for (const text of [
        row.ddHhMmSs,
        String(row.videoTime),
        row.timeFormatted,
        String(row.detected),
      ]) {
        const cell = document.createElement("span");
        cell.textContent = text;
        element.appendChild(cell);
      }
      spacer.appendChild(element);
      materialized.set(index, element);
    }
  };

  viewport.addEventListener("scroll", renderWindow);
  renderWindow();

  return {
    root,
    materializedRows: () => materialized.size,
    refresh: renderWindow,
  };
}
