/** Message builders: every user gesture maps to exactly one of these. */

import type { Envelope, Pose, ResolutionChoice } from "./types";

let counter = 0;

export function nextRequestId(): string {
  counter += 1;
  return `c${counter}`;
}

function envelope(type: string, payload: Record<string, unknown>): Envelope {
  return { type, request_id: nextRequestId(), payload };
}

export const messages = {
  hello(): Envelope {
    return envelope("hello", {});
  },
  raycast(x: number, y: number): Envelope {
    // top-down view: rays drop straight down from above the scene
    return envelope("raycast", { origin: [x, y, 5.0], direction: [0, 0, -1] });
  },
  lassoSelect(polygon: [number, number][]): Envelope {
    return envelope("lasso_select", { polygon });
  },
  openMenu(objectId: string): Envelope {
    return envelope("open_menu", { object_id: objectId });
  },
  beginDrag(objectId: string): Envelope {
    return envelope("begin_drag", { object_id: objectId });
  },
  dragSample(pose: Pose): Envelope {
    return envelope("drag_sample", { pose });
  },
  endDrag(pose: Pose): Envelope {
    return envelope("end_drag", { pose });
  },
  setParam(objectId: string, action: string,
           param: Record<string, unknown> | null): Envelope {
    return envelope("set_param", { object_id: objectId, action, param });
  },
  requestResolutions(): Envelope {
    return envelope("request_resolutions", {});
  },
  chooseResolution(choice: ResolutionChoice): Envelope {
    return envelope("choose_resolution", { choice });
  },
  confirm(): Envelope {
    return envelope("confirm", {});
  },
  preempt(): Envelope {
    return envelope("preempt", {});
  },
  humanAction(mutation: Record<string, unknown>): Envelope {
    return envelope("human_action", { mutation });
  },
};
