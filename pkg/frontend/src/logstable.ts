// Sortable table widget for the service log feed. Clicking a header sorts by
// that column; clicking it again reverses the order.

export interface Column<Row> {
  key: string;
  label: string;
  value(row: Row): string | number | null;
}

export class SortableTable<Row> {
  readonly element: HTMLTableElement;
  private rows: Row[] = [];
  private sortKey: string | null = null;
  private ascending = true;

  constructor(
    private readonly doc: Document,
    private readonly columns: Column<Row>[],
  ) {
    this.element = doc.createElement("table");
    this.element.className = "sortable";
  }

  setRows(rows: Row[]): void {
    this.rows = rows.slice();
    this.render();
  }

  sortBy(key: string): void {
    if (this.sortKey === key) {
      this.ascending = !this.ascending;
    } else {
      this.sortKey = key;
      this.ascending = true;
    }
    this.render();
  }

  private sortedRows(): Row[] {
    const key = this.sortKey;
    if (key === null) {
      return this.rows;
    }
    const column = this.columns.find((c) => c.key === key);
    if (!column) {
      return this.rows;
    }
    const direction = this.ascending ? 1 : -1;
    return this.rows
      .slice()
      .sort((a, b) => direction * compareCells(column.value(a), column.value(b)));
  }

  cellText(): string[][] {
    return this.sortedRows().map((row) =>
      this.columns.map((c) => formatCell(c.value(row))),
    );
  }

  private render(): void {
    this.element.textContent = "";
    const head = this.doc.createElement("thead");
    const headRow = this.doc.createElement("tr");
    for (const column of this.columns) {
      const th = this.doc.createElement("th");
      th.textContent =
        column.label +
        (this.sortKey === column.key ? (this.ascending ? " ↑" : " ↓") : "");
      th.dataset["key"] = column.key;
      th.addEventListener("click", () => this.sortBy(column.key));
      headRow.appendChild(th);
    }
    head.appendChild(headRow);
    this.element.appendChild(head);

    const body = this.doc.createElement("tbody");
    for (const row of this.sortedRows()) {
      const tr = this.doc.createElement("tr");
      for (const column of this.columns) {
        const td = this.doc.createElement("td");
        td.textContent = formatCell(column.value(row));
        tr.appendChild(td);
      }
      body.appendChild(tr);
    }
    this.element.appendChild(body);
  }
}

function compareCells(a: string | number | null, b: string | number | null): number {
  if (a === null && b === null) return 0;
  if (a === null) return -1;
  if (b === null) return 1;
  if (typeof a === "number" && typeof b === "number") {
    return a - b;
  }
  const sa = String(a);
  const sb = String(b);
  return sa < sb ? -1 : sa > sb ? 1 : 0;
}

function formatCell(value: string | number | null): string {
  if (value === null) {
    return "";
  }
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : value.toFixed(4);
  }
  return value;
}
