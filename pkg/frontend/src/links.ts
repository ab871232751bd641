/** Deep-link fragment codec shared with the exporter: #day=<id>&frame=<n>. */

const LINK_RE = /#day=([^&]*)&frame=(\d+)$/;

export function viewerLink(dayId: string, frame: number): string {
  return `#day=${dayId}&frame=${frame}`;
}

export function parseViewerLink(link: string): { dayId: string; frame: number } {
  const match = LINK_RE.exec(link);
  if (!match) {
    throw new Error(`not a viewer link: ${link}`);
  }
  return { dayId: match[1]!, frame: Number(match[2]!) };
}
