/** Dismiss-persistent anomaly alerts folded from snapshot flag lists. */

export type Severity = "critical" | "warning";

export interface Alert {
  name: string;
  detail: string;
  /** Parsed from a TAMPER detail; null for every other flag. */
  firstBadSeq: number | null;
  severity: Severity;
  /** Stable identity; dismissal sticks to it across reconnects. */
  key: string;
}

const CRITICAL = new Set(["TAMPER"]);
const FIRST_BAD = /(?:^|\s)first_bad_seq=(\d+)(?:\s|$)/;

export function alertFrom(name: string, detail: string): Alert {
  let firstBadSeq: number | null = null;
  if (name === "TAMPER") {
    const match = FIRST_BAD.exec(detail);
    firstBadSeq = match ? Number(match[1]) : null;
  }
  return {
    name,
    detail,
    firstBadSeq,
    severity: CRITICAL.has(name) ? "critical" : "warning",
    key: detail ? `${name} ${detail}` : name,
  };
}

/** Feed of alerts seen so far; dismissing one keeps it gone for good. */
export class AlertFeed {
  private readonly seen = new Map<string, Alert>();
  private readonly dismissed = new Set<string>();

  ingest(flags: Array<[string, string]>): void {
    for (const [name, detail] of flags) {
      const alert = alertFrom(name, detail);
      if (!this.seen.has(alert.key)) {
        this.seen.set(alert.key, alert);
      }
    }
  }

  dismiss(key: string): void {
    this.dismissed.add(key);
  }

  /** Alerts still showing, oldest first. */
  active(): Alert[] {
    return [...this.seen.values()].filter((alert) => !this.dismissed.has(alert.key));
  }
}
