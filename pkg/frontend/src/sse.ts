/** Incremental server-sent-events parser; chunk boundaries fall anywhere. */

export class SseParser {
  private buffer = "";
  private dataLines: string[] = [];

  /** Feed one chunk of stream text; returns completed event payloads. */
  feed(chunk: string): string[] {
    this.buffer += chunk;
    const events: string[] = [];
    for (;;) {
      const newline = this.buffer.indexOf("\n");
      if (newline < 0) {
        break;
      }
      const line = this.buffer.slice(0, newline).replace(/\r$/, "");
      this.buffer = this.buffer.slice(newline + 1);
      if (line === "") {
        if (this.dataLines.length > 0) {
          events.push(this.dataLines.join("\n"));
          this.dataLines = [];
        }
      } else if (line.startsWith(":")) {
        // comment/heartbeat line
      } else if (line.startsWith("data:")) {
        this.dataLines.push(line.slice(5).replace(/^ /, ""));
      }
      // other SSE fields (event:, id:, retry:) are not used by the server
    }
    return events;
  }
}
