/** Protocol and world shapes mirrored from the gateway. */

export interface Pose {
  x: number;
  y: number;
  z: number;
  yaw: number;
}

export interface ObjectRecord {
  id: string;
  class: string;
  pose: Pose;
  color_state: "Normal" | "Limited";
  supported_by: string | null;
  contains: string[];
  fill_level: number;
}

export interface StaticRecord {
  id: string;
  center: [number, number];
  size: [number, number];
  z: [number, number];
  yaw: number;
  blocks_navigation: boolean;
  support_surface: boolean;
}

export interface DoorRecord {
  id: string;
  open: boolean;
  span: { center: [number, number]; size: [number, number]; z: [number, number]; yaw: number };
}

export interface RobotRecord {
  spec: {
    id: string;
    capabilities: string[];
    base_footprint_radius: number;
    [key: string]: unknown;
  };
  state: {
    robot_id: string;
    base_pose: Pose;
    lift_z: number;
    arm_ext: number;
    battery: number;
    phase: string;
    holding: string | null;
  };
}

export interface ClassRecord {
  intrinsic: {
    size: [number, number, number];
    graspable: boolean;
    is_container: boolean;
    [key: string]: unknown;
  };
  methods: string[];
}

export interface WorldDoc {
  revision: number;
  bounds: [number, number, number, number];
  classes: Record<string, ClassRecord>;
  statics: StaticRecord[];
  doors: DoorRecord[];
  objects: Record<string, ObjectRecord>;
  robots: Record<string, RobotRecord>;
}

export interface Envelope {
  type: string;
  request_id: string | number | null;
  payload: Record<string, unknown>;
}

export interface Explanation {
  tag: string;
  tooltip: string;
  condition: { variant: string; data: Record<string, unknown> };
}

export interface VerdictPayload {
  feasible: boolean;
  explanation: Explanation | null;
  checked_robot: string | null;
  evaluated_at_revision: number;
  resolvable: { auto: boolean; alternative: boolean } | null;
  object_id: string;
  color: "Normal" | "Limited";
}

export interface MenuEntryPayload {
  action: { name: string; spatial_param: string };
  state: "Available" | "GrayedOut";
  explanation: Explanation | null;
}

export interface OfferPayload {
  auto: { plan_id: string; steps: unknown[] } | null;
  alternative: {
    kind: string;
    object_id: string | null;
    pose: Pose | null;
    plan: { plan_id: string; steps: unknown[] };
  } | null;
  ignore_available: boolean;
}

export interface Keyframe {
  t: number;
  entity: string;
  pose: Pose;
}

export interface DeltaPayload {
  revision: number;
  mutation: { kind: string; [key: string]: unknown };
  changes: {
    objects: Record<string, ObjectRecord>;
    doors: DoorRecord[];
    robots: Record<string, RobotRecord["state"]>;
  };
}

export interface ExecutionEventPayload {
  timestamp: number;
  robot_id: string;
  kind: string;
  plan_id: string;
  step_index: number | null;
  data: Record<string, unknown>;
}

export type ResolutionChoice = "Auto" | "Alternative" | "Ignore";
