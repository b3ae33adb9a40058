/** Console bootstrap: connect, mirror, render at display refresh. */

import { GatewayClient } from "./client";
import { InputController } from "./input";
import { ViewModel } from "./model";
import { messages } from "./protocol";
import { fitViewport, renderScene, Viewport } from "./render";

function serverUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("server") ?? "ws://127.0.0.1:8700/ws";
}

export function boot(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const model = new ViewModel();
  const socket = new WebSocket(serverUrl());
  const client = new GatewayClient(socket as never, model);

  let view: Viewport = {
    width: canvas.width, height: canvas.height, scale: 80,
    offsetX: 8, offsetY: canvas.height - 8,
  };
  const input = new InputController(client, () => view);

  socket.onopen = () => client.send(messages.hello());

  canvas.addEventListener("pointerdown", (e) => {
    e.preventDefault();
    input.pointerDown(e.offsetX, e.offsetY, e.button);
  });
  canvas.addEventListener("pointermove", (e) =>
    input.pointerMove(e.offsetX, e.offsetY));
  canvas.addEventListener("pointerup", (e) =>
    input.pointerUp(e.offsetX, e.offsetY));
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    input.wheel(e.deltaY);
  });
  canvas.addEventListener("contextmenu", (e) => e.preventDefault());

  // side panel buttons
  bind("btn-auto", () => input.chooseResolution("Auto"));
  bind("btn-alt", () => input.chooseResolution("Alternative"));
  bind("btn-ignore", () => input.chooseResolution("Ignore"));
  bind("btn-confirm", () => input.confirm());
  bind("btn-resolve", () => client.send(messages.requestResolutions()));
  bind("btn-preempt", () => client.send(messages.preempt()));

  function bind(id: string, handler: () => void): void {
    document.getElementById(id)?.addEventListener("click", handler);
  }

  function frame(): void {
    if (model.world) {
      view = fitViewport(model.world, canvas.width, canvas.height);
    }
    input.flushFrame();
    model.tickTimeline();
    renderScene(ctx as never, model, view);
    syncPanel();
    requestAnimationFrame(frame);
  }

  function syncPanel(): void {
    const confirm = document.getElementById("btn-confirm") as
      HTMLButtonElement | null;
    if (confirm) {
      confirm.disabled = !(model.confirmEnabled ||
        (model.verdict?.feasible ?? false));
    }
    const status = document.getElementById("status");
    if (status) {
      const tag = model.activeTag();
      status.textContent = tag ? `blocked: ${tag}` :
        model.executing ? "executing…" :
        model.awaitingPrompt ? `waiting: ${model.awaitingPrompt}` : "ready";
    }
  }

  requestAnimationFrame(frame);
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", boot);
}
