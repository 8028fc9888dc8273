#!/usr/bin/env python3
"""Writes the scripted-response files consumed by `websynth author`.

shop_e2e.json drives one success trajectory through the fixture shop and is
replayed by the end-to-end test. dataset.json drives ten success trajectories
with known scroll counts; `author --out` turns it into fixtures/dataset.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures" / "scripts"


def payload(task, nl, grounded, thoughts="Looking at the page."):
    body = json.dumps(
        {"task": task, "action_in_natural_language": nl, "grounded_action": grounded}, indent=2
    )
    return f"{thoughts}\n\n```json\n{body}\n```\n"


def summary(text):
    return f"The actions add up to one coherent task.\n\n```\n{text}\n```\n"


def verdict(thoughts, status="success"):
    return f"Thoughts: {thoughts}\nStatus: {status}\n"


def trajectory(seed, steps, summary_text, reasoning=False):
    """steps: list of (task, nl, grounded); the last entry is the stop."""
    first, rest = steps[0], steps[1:]
    responses = {
        "proposal": [payload(*first)],
        "refinement": [payload(*s) for s in rest],
        "summarization": [summary(summary_text)],
        "verification": [verdict("The final page shows the requested outcome.")],
    }
    if reasoning:
        responses["reasoning"] = [
            f"The task needs me to {s[1][0].lower() + s[1][1:]}, so that is the next action."
            for s in steps[:-1]
        ]
    return {"seed": seed, "responses": responses}


def stop(task):
    return (task, "Stop, the task is complete", "stop")


def down(task):
    return (task, "Scroll down to see more of the page", "scroll [down]")


def up(task):
    return (task, "Scroll back up to the top", "scroll [up]")


def e2e():
    t0 = "Browse the living room furniture"
    t1 = "Look at the UPPLAND sofa"
    t2 = "Choose the dark grey UPPLAND sofa"
    t3 = "Add a dark grey UPPLAND sofa to the cart"
    steps = [
        (t0, "Click the Living Room link", "click [1]"),
        (t1, "Click the UPPLAND Sofa product link", "click [5]"),
        (t2, "Select Dark Grey as the colour", "select [6] [Dark Grey]"),
        (t3, "Click the Add to cart button", "click [8]"),
        stop(t3),
    ]
    return {
        "fixtures": ["../shop"],
        "config": {"reasoning": True, "max_steps": 15},
        "trajectories": [
            trajectory(
                "fixture://shop/home",
                steps,
                "Add a dark grey UPPLAND sofa to the cart on the Fixture Home Furnishings site",
                reasoning=True,
            )
        ],
    }


def dataset():
    ts = []
    t = "Find a sofa in the living room range"
    ts.append(trajectory("fixture://shop/home", [
        (t, "Click the Living Room link", "click [1]"),
        (t, "Open the UPPLAND Sofa page", "click [5]"),
        stop(t)], "Find the UPPLAND sofa on the Fixture Home Furnishings site"))
    t = "Browse dining tables from the deals page"
    ts.append(trajectory("fixture://shop/deals", [
        down(t), (t, "Click the Dining link", "click [2]"), stop(t)],
        "Browse dining furniture on the Fixture Home Furnishings site"))
    t = "Look at armchairs"
    ts.append(trajectory("fixture://shop/living", [
        down(t), up(t), (t, "Open the STRANDMON Armchair page", "click [6]"), stop(t)],
        "View the STRANDMON armchair on the Fixture Home Furnishings site"))
    t = "Look at dining tables"
    ts.append(trajectory("fixture://shop/dining", [
        down(t), up(t), down(t), (t, "Open the EKEDALEN Table page", "click [5]"), stop(t)],
        "View the EKEDALEN table on the Fixture Home Furnishings site"))
    t = "Open the sofa from the search results"
    ts.append(trajectory("fixture://shop/search", [
        down(t), up(t), down(t), up(t), (t, "Click the first result", "click [5]"), stop(t)],
        "Open the sofa result from a product search on the Fixture Home Furnishings site"))
    t = "Add two blue sofas to the cart"
    ts.append(trajectory("fixture://shop/sofa", [
        (t, "Select Blue as the colour", "select [6] [Blue]"),
        (t, "Select quantity 2", "select [7] [2]"),
        (t, "Click Add to cart", "click [8]"),
        stop(t)], "Add two blue UPPLAND sofas to the cart on the Fixture Home Furnishings site"))
    t = "Add the armchair to the cart"
    ts.append(trajectory("fixture://shop/chair", [
        down(t), up(t), (t, "Click Add to cart", "click [6]"), stop(t)],
        "Add the STRANDMON armchair to the cart on the Fixture Home Furnishings site"))
    t = "Buy the dining table"
    ts.append(trajectory("fixture://shop/table", [
        down(t), up(t), down(t), (t, "Click Add to cart", "click [6]"),
        (t, "Click Proceed to checkout", "click [5]"), stop(t)],
        "Start checkout for the EKEDALEN table on the Fixture Home Furnishings site"))
    t = "Check out with the name Jane Doe"
    ts.append(trajectory("fixture://shop/cart", [
        down(t), up(t), down(t), up(t), (t, "Click Proceed to checkout", "click [5]"),
        (t, "Type Jane Doe into the Full name field", "type [5] [Jane Doe]"), stop(t)],
        "Enter the name Jane Doe at checkout on the Fixture Home Furnishings site"))
    t = "Fill in express delivery details"
    ts.append(trajectory("fixture://shop/checkout", [
        (t, "Type Alex Kim into the Full name field", "type [5] [Alex Kim]"),
        (t, "Type the street address", "type [6] [12 Main Street]"),
        (t, "Choose Express delivery", "select [7] [Express]"),
        down(t), stop(t)],
        "Fill in express delivery details for Alex Kim on the Fixture Home Furnishings site"))
    return {"fixtures": ["../shop"], "config": {"max_steps": 15}, "trajectories": ts}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "shop_e2e.json").write_text(json.dumps(e2e(), indent=2) + "\n")
    (OUT / "dataset.json").write_text(json.dumps(dataset(), indent=2) + "\n")


if __name__ == "__main__":
    main()
