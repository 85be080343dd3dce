/** Four labeled probability bars; the winning class gets a marker class. */
export function renderBars(
  container: HTMLElement,
  order: string[],
  probabilities: number[],
): void {
  container.textContent = "";
  if (order.length !== probabilities.length) {
    throw new Error(
      `got ${probabilities.length} probabilities for ${order.length} labels`,
    );
  }
  const top = Math.max(...probabilities);
  order.forEach((label, i) => {
    const p = probabilities[i] ?? 0;
    const row = document.createElement("div");
    row.className = "prob-row" + (p === top ? " prob-row-top" : "");

    const name = document.createElement("span");
    name.className = "prob-label";
    name.textContent = label;

    const track = document.createElement("div");
    track.className = "prob-track";
    const fill = document.createElement("div");
    fill.className = "prob-fill";
    fill.style.width = `${(p * 100).toFixed(1)}%`;
    track.appendChild(fill);

    const value = document.createElement("span");
    value.className = "prob-value";
    value.textContent = `${(p * 100).toFixed(1)}%`;

    row.append(name, track, value);
    container.appendChild(row);
  });
}
