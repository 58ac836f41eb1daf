/** SVG bar chart of detection-seconds per minute, straight from the
 * summary artifact's series. */

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderMinuteChart(series: [number, number][], width = 640, height = 160): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "minute-chart");
  svg.setAttribute("role", "img");
  svg.setAttribute("aria-label", "Detection seconds per minute");

  const padding = { left: 30, bottom: 22, top: 8, right: 8 };
  const plotW = width - padding.left - padding.right;
  const plotH = height - padding.top - padding.bottom;
  const maxValue = Math.max(1, ...series.map(([, v]) => v));
  const slot = series.length > 0 ? plotW / series.length : plotW;

  const axis = document.createElementNS(SVG_NS, "line");
  axis.setAttribute("x1", String(padding.left));
  axis.setAttribute("y1", String(padding.top + plotH));
  axis.setAttribute("x2", String(width - padding.right));
  axis.setAttribute("y2", String(padding.top + plotH));
  axis.setAttribute("class", "chart-axis");
  svg.appendChild(axis);

  series.forEach(([minute, value], index) => {
    const barHeight = (value / maxValue) * plotH;
    const bar = document.createElementNS(SVG_NS, "rect");
    bar.setAttribute("x", String(padding.left + index * slot + slot * 0.15));
    bar.setAttribute("y", String(padding.top + plotH - barHeight));
    bar.setAttribute("width", String(slot * 0.7));
    bar.setAttribute("height", String(barHeight));
    bar.setAttribute("class", "chart-bar");
    bar.setAttribute("data-minute", String(minute));
    bar.setAttribute("data-value", String(value));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `minute ${minute}: ${value}s with detections`;
    bar.appendChild(title);
    svg.appendChild(bar);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(padding.left + index * slot + slot / 2));
    label.setAttribute("y", String(height - 6));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "chart-label");
    label.textContent = String(minute);
    svg.appendChild(label);
  });

  return svg;
}
