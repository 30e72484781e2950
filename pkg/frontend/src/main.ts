// Browser entry point: wires the view models to canvases and the API.
// Domain numbers all come from the server; this file only draws.

import { ApiClient, VersionConflictError } from "./api.js";
import { BiographyViewModel } from "./biographyView.js";
import { ResolveDialogController } from "./resolveDialog.js";
import { RingViewModel } from "./ringView.js";
import { buildWordCloud } from "./wordCloud.js";
import type { BiographyJson, HandscrollJson } from "./types.js";

const TARGET = 900;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class App {
  private api = new ApiClient("");
  private ring: RingViewModel | null = null;
  private record: HandscrollJson | null = null;
  private biography: BiographyJson | null = null;
  private ringImage = new Image();
  private activeSealer: string | null = null;

  async start(): Promise<void> {
    const scrolls = await this.api.listHandscrolls();
    const select = el<HTMLSelectElement>("scroll-select");
    for (const s of scrolls) {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = `${s.title} (${s.seal_count} seals)`;
      select.appendChild(opt);
    }
    select.onchange = () => void this.load(select.value);
    if (scrolls.length) await this.load(scrolls[0].id);
  }

  async load(id: string): Promise<void> {
    this.record = await this.api.getHandscroll(id);
    const layout = await this.api.getLayout(id, TARGET);
    this.ring = new RingViewModel(layout.ring, layout.plan);
    this.activeSealer = null;

    await new Promise<void>((resolve, reject) => {
      this.ringImage.onload = () => resolve();
      this.ringImage.onerror = () => reject(new Error("ring render failed"));
      this.ringImage.src = this.api.ringImageUrl(id, TARGET);
    });

    this.biography = await this.api.getBiography(id);
    this.drawRing();
    this.drawBiography();
    await this.drawClouds(id);
    this.wireInteractions();
  }

  private wireInteractions(): void {
    const canvas = el<HTMLCanvasElement>("ring-canvas");
    canvas.onmousemove = (ev) => {
      if (!this.ring) return;
      const rect = canvas.getBoundingClientRect();
      const u = ev.clientX - rect.left;
      const v = ev.clientY - rect.top;
      const hit = this.ring.hitTest(u, v);
      if (hit === null) {
        // hovering blank space rotates the ring
        this.ring.rotate(0.02);
        this.drawRing();
      } else {
        el<HTMLDivElement>("hover-info").textContent =
          `${hit.kind} block, strip [${hit.strip_x0}, ${hit.strip_x1})`;
      }
    };
    canvas.onclick = (ev) => {
      if (!this.ring || !this.record) return;
      const rect = canvas.getBoundingClientRect();
      const hit = this.ring.hitTest(ev.clientX - rect.left, ev.clientY - rect.top);
      if (hit) this.ring.rotateToStripX(hit.strip_x0);
      this.drawRing();
    };
  }

  private drawRing(): void {
    if (!this.ring) return;
    const canvas = el<HTMLCanvasElement>("ring-canvas");
    const size = this.ringImage.width;
    canvas.width = size;
    canvas.height = size;
    const ctx = canvas.getContext("2d")!;
    ctx.clearRect(0, 0, size, size);

    const c = this.ring.center;
    ctx.save();
    ctx.translate(c.u, c.v);
    ctx.rotate(this.ring.rotation);
    ctx.drawImage(this.ringImage, -c.u, -c.v);
    ctx.restore();

    // block overlays (one stroke per served arc)
    for (const overlay of this.ring.overlays()) {
      ctx.beginPath();
      ctx.strokeStyle = overlay.arc.kind === "core" ? "#c33" : "#99a";
      ctx.lineWidth = overlay.arc.kind === "core" ? 2 : 1;
      ctx.arc(c.u, c.v, overlay.arc.outer_radius, overlay.startAngle, overlay.endAngle);
      ctx.stroke();
    }

    if (this.activeSealer && this.record) {
      for (const line of this.ring.sealLinkLines(this.record.seals, this.activeSealer)) {
        ctx.beginPath();
        ctx.setLineDash(line.kind === "dashed" ? [4, 3] : []);
        ctx.strokeStyle = "#b22";
        ctx.moveTo(line.from.u, line.from.v);
        ctx.lineTo(line.to.u, line.to.v);
        ctx.stroke();
      }
      ctx.setLineDash([]);
    }
  }

  private drawBiography(): void {
    if (!this.biography) return;
    const vm = new BiographyViewModel(this.biography);
    const canvas = el<HTMLCanvasElement>("bio-canvas");
    canvas.width = 1200;
    const rows = vm.rows();
    canvas.height = 24 * rows.length + 40;
    const ctx = canvas.getContext("2d")!;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    let y = 20;
    for (const [tier, tierRows] of vm.tierRows()) {
      for (const row of tierRows) {
        ctx.fillStyle = "#333";
        ctx.fillText(`T${tier} ${row.entry.name}`, 4, y + 4);
        if (row.lifespan) {
          ctx.strokeStyle = row.dashedBorder ? "#888" : "#654";
          ctx.setLineDash(row.dashedBorder ? [5, 3] : []);
          ctx.strokeRect(row.lifespan.x0, y - 5, row.lifespan.x1 - row.lifespan.x0, 10);
          ctx.setLineDash([]);
        }
        ctx.fillStyle = "#b22";
        for (const m of row.sealMarkers) ctx.fillRect(m.x - 2, y + 6, 4, 4);
        ctx.fillStyle = "#000";
        for (const m of row.inscriptionMarkers) ctx.fillRect(m.x - 2, y - 10, 4, 4);
        if (row.undatedSeals) ctx.fillText(`${row.undatedSeals}`, 60, y + 10);
        y += 24;
      }
    }
  }

  private async drawClouds(id: string): Promise<void> {
    const stats = await this.api.getStats(id);
    const target = el<HTMLDivElement>("cloud");
    target.innerHTML = "";
    for (const [tag, freqs] of Object.entries(stats.word_frequencies)) {
      const section = document.createElement("div");
      section.className = "cloud-section";
      const heading = document.createElement("h4");
      heading.textContent = tag;
      section.appendChild(heading);
      for (const item of buildWordCloud(freqs)) {
        const span = document.createElement("span");
        span.textContent = item.text;
        span.style.opacity = String(item.opacity);
        span.className = "cloud-word";
        span.onclick = () => void this.openResolve(item.text);
        section.appendChild(span);
      }
      target.appendChild(section);
    }
  }

  private async openResolve(surface: string): Promise<void> {
    if (!this.record) return;
    const dialog = new ResolveDialogController(this.api, this.record.id);
    const res = await dialog.open(surface, "person");
    const box = el<HTMLDivElement>("resolve-box");
    box.textContent = res.entity_id
      ? `${surface} -> ${res.canonical_name} [${res.method}; ${res.sources.join(", ")}]`
      : `${surface}: unresolved (${res.candidates_considered.length} candidates)`;
  }

  async adjustLambdas(lambdas: [number, number, number]): Promise<void> {
    if (!this.record || !this.biography) return;
    try {
      this.biography = await this.api.customize(
        this.record.id,
        { kind: "set_lambda", lambdas },
        this.biography.version,
      );
    } catch (err) {
      if (err instanceof VersionConflictError) {
        // stale: reload and let the historian retry
        this.biography = await this.api.getBiography(this.record.id);
      } else {
        throw err;
      }
    }
    this.drawBiography();
  }
}

if (typeof document !== "undefined") {
  const app = new App();
  void app.start();
  (window as unknown as { app: App }).app = app;
}
