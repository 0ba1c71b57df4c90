"""Benchmark scene definitions used to regenerate the shipped task files.

Run ``python3 tools/build_data.py`` after editing.
"""

ARM = ["get_position", "get_size", "open_gripper", "close_gripper", "move_to_position"]
QUAD = ["get_position", "get_size", "walk_to_position", "climb_to_position", "push_to_position"]


def obj(name, position, size, mass=0.5, material="", offset=(0, 0, 0), support=False, tags=(), yaw=0.0):
    return {
        "name": name, "position": list(position), "size": list(size), "yaw": yaw, "mass": mass,
        "material": material, "graspable_offset": list(offset), "is_support_surface": support,
        "tags": sorted(tags),
    }


def arm_robot(axis_order="straight", radius=0.6, home=(0.3, 0.0, 0.4)):
    return {
        "embodiment": "arm", "skills": ARM, "base_position": [0.0, 0.0, 0.0],
        "workspace_center": [0.0, 0.0, 0.0], "workspace_radius": radius,
        "home_position": list(home), "axis_order": axis_order,
    }


def quad_robot(base, gap_limit=0.1, climb=0.3, mass=10.0):
    return {
        "embodiment": "quadruped", "skills": QUAD, "base_position": list(base),
        "gap_limit": gap_limit, "climb_step_limit": climb, "push_mass_limit": mass, "half_width": 0.15,
    }


def milk_reaching():
    return {
        "id": "milk-reaching",
        "instruction": "Grasp the milk carton.",
        "success_check": "holding:milk",
        "scene": {
            "floor_name": "table",
            "floor_extent": [-0.2, -0.8, 1.2, 0.8],
            "objects": [
                obj("milk", (0.70, 0.0, 0.10), (0.07, 0.07, 0.20), 1.0, "paper carton"),
                obj("hammer_handle", (0.30, -0.30, 0.015), (0.30, 0.03, 0.03), 0.3, "wood",
                    offset=(-0.10, 0.0, 0.0)),
                obj("hammer_head", (0.47, -0.245, 0.015), (0.04, 0.14, 0.03), 0.4, "steel"),
                obj("sponge", (0.25, 0.30, 0.02), (0.10, 0.06, 0.04), 0.05, "foam"),
                obj("cup", (0.10, 0.35, 0.05), (0.08, 0.08, 0.10), 0.2, "ceramic"),
            ],
            "rigid_groups": [["hammer_handle", "hammer_head"]],
            "robot": arm_robot(),
            "constraints": [
                {"id": "c1", "kind": "environment", "text": "The milk carton lies beyond the reach of the arm.",
                 "predicate": "outside_workspace:milk"},
                {"id": "r1", "kind": "robot",
                 "text": "The robot can only move its gripper within 0.60 m of its base.",
                 "predicate": "robot_limit:workspace_radius"},
            ],
            "mechanisms": [],
        },
    }


def can_grasping():
    return {
        "id": "can-grasping",
        "instruction": "Grasp the can.",
        "success_check": "holding:can",
        "scene": {
            "floor_name": "table",
            "floor_extent": [-0.2, -0.8, 1.2, 0.8],
            "objects": [
                obj("can", (0.72, 0.25, 0.06), (0.066, 0.066, 0.12), 0.35, "aluminium"),
                obj("scroll", (0.50, -0.05, 0.0025), (0.60, 0.16, 0.005), 0.1, "paper",
                    offset=(-0.27, 0.0, 0.0), tags=("cannot_lift",)),
                obj("stick", (0.30, 0.35, 0.015), (0.30, 0.03, 0.03), 0.1, "wood", offset=(-0.13, 0.0, 0.0)),
                obj("book", (0.05, -0.45, 0.02), (0.15, 0.20, 0.04), 0.6, "paper"),
            ],
            "robot": arm_robot(axis_order="yxz", home=(0.2, 0.0, 0.3)),
            "constraints": [
                {"id": "c1", "kind": "environment", "text": "The can lies beyond the reach of the arm.",
                 "predicate": "outside_workspace:can"},
                {"id": "c2", "kind": "environment", "text": "The scroll cannot be lifted.",
                 "predicate": "not_liftable:scroll"},
                {"id": "r1", "kind": "robot",
                 "text": "The robot can only move its gripper within 0.60 m of its base.",
                 "predicate": "robot_limit:workspace_radius"},
                {"id": "r2", "kind": "robot",
                 "text": "The gripper moves along the y axis first, then x, then z.",
                 "predicate": "robot_limit:axis_order"},
            ],
            "mechanisms": [],
        },
    }


def button_pressing():
    return {
        "id": "button-pressing",
        "instruction": "Press the button.",
        "success_check": "flag:button_pressed",
        "scene": {
            "floor_name": "table",
            "floor_extent": [-0.2, -0.8, 1.2, 0.8],
            "objects": [
                obj("button", (0.90, 0.0, 0.03), (0.04, 0.04, 0.06), 0.2, "plastic", tags=("fixed",)),
                obj("block_a", (0.30, -0.25, 0.02), (0.20, 0.04, 0.04), 0.1, "magnetic",
                    offset=(-0.08, 0.0, 0.0), tags=("magnetic",)),
                obj("block_b", (0.30, 0.25, 0.02), (0.20, 0.04, 0.04), 0.1, "magnetic",
                    offset=(-0.08, 0.0, 0.0), tags=("magnetic",)),
                obj("tape", (0.10, 0.45, 0.015), (0.06, 0.06, 0.03), 0.05, "plastic"),
            ],
            "robot": arm_robot(axis_order="zyx", home=(0.2, 0.0, 0.3)),
            "constraints": [
                {"id": "c1", "kind": "environment", "text": "The button lies beyond the reach of the arm.",
                 "predicate": "outside_workspace:button"},
                {"id": "r1", "kind": "robot",
                 "text": "The robot can only move its gripper within 0.60 m of its base.",
                 "predicate": "robot_limit:workspace_radius"},
                {"id": "r2", "kind": "robot",
                 "text": "The gripper moves along the z axis first, then y, then x.",
                 "predicate": "robot_limit:axis_order"},
            ],
            "mechanisms": [
                {"id": "m1", "kind": "magnetic_attach", "participants": {"a": "block_a", "b": "block_b"},
                 "trigger": {"max_gap": 0.01, "max_angle_deg": 10.0}, "effect": "merge"},
                {"id": "m2", "kind": "button", "participants": {"button": "button"},
                 "trigger": {"distance": 0.01}, "effect": "set button_pressed"},
            ],
        },
    }


def sofa_traversing(gap=0.30):
    b_lo = 1.5 + gap
    b_len = 1.5
    return {
        "id": "sofa-traversing",
        "instruction": "Move from the sofa you are standing on to the other sofa.",
        "success_check": "support:sofa_b",
        "scene": {
            "floor_name": "ground",
            "floor_extent": [-1.0, -1.0, 4.5, 2.5],
            "objects": [
                obj("sofa_a", (0.75, 0.6, 0.2), (1.5, 1.2, 0.4), 40.0, "fabric", support=True),
                obj("sofa_b", (b_lo + b_len / 2, 0.6, 0.2), (b_len, 1.2, 0.4), 40.0, "fabric", support=True),
                obj("surfboard", (0.8, 0.3, 0.42), (0.7, 0.3, 0.04), 3.0, "fiberglass"),
                obj("cloth", (0.8, 0.9, 0.4025), (0.4, 0.3, 0.005), 0.2, "cotton"),
            ],
            "robot": quad_robot((0.2, 0.9, 0.4)),
            "constraints": [
                {"id": "c1", "kind": "environment",
                 "text": f"There is a gap of {gap:.2f} m between sofa_a and sofa_b.",
                 "predicate": "gap_exceeds_limit:sofa_a,sofa_b" if gap > 0.1 else "robot_limit:gap_limit"},
                {"id": "r1", "kind": "robot", "text": "The robot can only walk across a gap of at most 0.10 m.",
                 "predicate": "robot_limit:gap_limit"},
            ],
            "mechanisms": [
                {"id": "m1", "kind": "bridge",
                 "participants": {"side_a": "sofa_a", "side_b": "sofa_b", "spanner": "surfboard"},
                 "trigger": {"min_overlap": 0.05}, "effect": "mark gap spanned"},
            ],
        },
    }


def sofa_climbing(height=0.6):
    return {
        "id": "sofa-climbing",
        "instruction": "Climb onto the sofa.",
        "success_check": "support:sofa",
        "scene": {
            "floor_name": "ground",
            "floor_extent": [-1.5, -2.5, 3.5, 2.5],
            "objects": [
                obj("sofa", (2.0, 0.0, height / 2), (0.8, 1.6, height), 40.0, "fabric", support=True),
                obj("large_box", (1.4, 0.0, 0.2), (0.4, 0.6, 0.4), 8.0, "cardboard", support=True),
                obj("small_box", (0.3, -1.0, 0.1), (0.4, 0.4, 0.2), 2.0, "cardboard", support=True),
            ],
            "robot": quad_robot((-0.5, -1.5, 0.0)),
            "constraints": [
                {"id": "c1", "kind": "environment", "text": f"The sofa is {height:.2f} m high.",
                 "predicate": "height_exceeds_climb:sofa" if height > 0.3 else "robot_limit:climb_step_limit"},
                {"id": "r1", "kind": "robot", "text": "The robot can only climb a step of at most 0.30 m.",
                 "predicate": "robot_limit:climb_step_limit"},
            ],
            "mechanisms": [],
        },
    }


def cube_lifting():
    return {
        "id": "cube-lifting",
        "instruction": "Lift the cube off the ground.",
        "success_check": "flag:cube_lifted",
        "scene": {
            "floor_name": "ground",
            "floor_extent": [-2.0, -2.0, 2.5, 2.0],
            "objects": [
                obj("yoga_roller", (0.0, 0.0, 0.075), (0.15, 0.6, 0.15), 1.0, "foam"),
                obj("surfboard", (0.0, 0.0, 0.17), (1.8, 0.4, 0.04), 3.0, "fiberglass", support=True),
                obj("chair", (0.7, 0.0, 0.075), (0.3, 0.6, 0.15), 5.0, "wood"),
                obj("cube", (-0.7, 0.0, 0.34), (0.3, 0.3, 0.3), 20.0, "wood"),
            ],
            "robot": quad_robot((1.5, 1.0, 0.0)),
            "constraints": [
                {"id": "c1", "kind": "environment", "text": "The cube weighs 20.00 kg.",
                 "predicate": "mass_exceeds_push:cube"},
                {"id": "r1", "kind": "robot", "text": "The robot can only push objects of at most 10.00 kg.",
                 "predicate": "robot_limit:push_mass_limit"},
            ],
            "mechanisms": [
                {"id": "m1", "kind": "lever",
                 "participants": {"lever": "surfboard", "fulcrum": "yoga_roller", "load": "cube",
                                  "support": "chair"},
                 "trigger": {"effort_end": "+x", "end_fraction": 0.3333333333333333},
                 "effect": "set cube_lifted"},
            ],
        },
    }


def all_tasks():
    out = []
    for t, variant in (
        (milk_reaching(), "default"),
        (can_grasping(), "default"),
        (button_pressing(), "default"),
        (sofa_traversing(), "default"),
        (sofa_climbing(), "default"),
        (cube_lifting(), "default"),
        (sofa_traversing(gap=0.05), "small-gap"),
        (sofa_climbing(height=0.25), "low-sofa"),
    ):
        t = dict(t, variant=variant, gold=t["id"])
        out.append({"schema_version": 1, **t})
    return out
