/** Gateway socket wrapper: sends builders' messages, feeds the view model. */

import type { Envelope } from "./types";
import { ViewModel } from "./model";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: unknown }) => void) | null;
  onopen: ((event?: unknown) => void) | null;
  onclose: ((event?: unknown) => void) | null;
  onerror: ((event?: unknown) => void) | null;
}

export class GatewayClient {
  readonly model: ViewModel;
  readonly sent: Envelope[] = [];
  private socket: SocketLike;
  private listeners: ((message: Envelope) => void)[] = [];

  constructor(socket: SocketLike, model?: ViewModel) {
    this.model = model ?? new ViewModel();
    this.socket = socket;
    socket.onmessage = (event) => {
      let message: Envelope;
      try {
        message = JSON.parse(String(event.data)) as Envelope;
      } catch {
        this.model.toasts.push("unparseable frame from server");
        return;
      }
      this.model.apply(message);
      for (const listener of this.listeners) listener(message);
    };
  }

  onMessage(listener: (message: Envelope) => void): void {
    this.listeners.push(listener);
  }

  send(message: Envelope): void {
    this.sent.push(message);
    if (message.type === "drag_sample" && this.model.drag) {
      this.model.drag.lastSampleId = String(message.request_id);
    }
    this.socket.send(JSON.stringify(message));
  }

  close(): void {
    this.socket.close();
  }
}
