"""Installable demo content: the event, spc and pca examples.

The numeric datasets are SYNTHETIC stand-ins generated from a fixed seed:
plausible piston-ring-style diameters around 74.00 mm for the control
chart demo and four correlated plant-operation variables for the PCA
demo. They are shaped like the classic textbook datasets (40 subgroups of
4; 21 observations of 4 variables) but the values are ours, never the
published ones.
"""

from __future__ import annotations

import random

from .report import ReportSpec, validate_spec
from .store import Store, StoreError
from .survey import Question, Questionnaire

EXAMPLES = ("event", "spc", "pca")

EVENT_PROMPTS = (
    "The event met my expectations overall",
    "The programme was relevant to my work",
    "The talks were clearly presented",
    "The speakers mastered their subjects",
    "The sessions kept to schedule",
    "The venue and facilities were adequate",
    "Registration was straightforward",
    "The supporting material was useful",
    "There was enough time for questions",
    "The event encouraged exchange between participants",
    "I would recommend this event to a colleague",
)


def event_questionnaire() -> Questionnaire:
    questions = tuple(
        Question(id=f"q{i + 1}", prompt=prompt, kind="likert5")
        for i, prompt in enumerate(EVENT_PROMPTS)
    )
    return Questionnaire(
        id="event",
        title="Event evaluation",
        questions=questions,
        min_level_to_view_report=0,
    )


def event_report_spec() -> dict:
    blocks = [
        {"kind": "likert", "params": {"question": f"q{i + 1}"}, "min_level": 0}
        for i in range(len(EVENT_PROMPTS))
    ]
    # broader-view extras: a cross tab for coordinators, components for directors
    blocks.append({
        "kind": "crosstab", "params": {"row": "q1", "col": "q11"},
        "min_level": 1, "title": "Expectations vs recommendation",
    })
    blocks.append({
        "kind": "pca", "params": {"mode": "correlation"},
        "min_level": 2, "title": "Principal components of all answers",
    })
    return {"id": "event-report", "source": {"questionnaire": "event"}, "blocks": blocks}


def spc_dataset() -> tuple[list[str], list[list[float]]]:
    """Synthetic 40x4 subgroup measurements around 74.00.

    The last two subgroups carry an upward shift so the demo chart shows
    out-of-control points.
    """
    rng = random.Random(740040)
    rows = []
    for i in range(40):
        shift = 0.030 if i >= 38 else 0.0
        rows.append([round(rng.gauss(74.000 + shift, 0.010), 3) for _ in range(4)])
    return ["x1", "x2", "x3", "x4"], rows


def pca_dataset() -> tuple[list[str], list[list[float]]]:
    """Synthetic 21x4 plant-operation style variables with shared structure."""
    rng = random.Random(210421)
    rows = []
    for _ in range(21):
        drive = rng.gauss(0.0, 1.0)
        flow = 60.0 + 6.0 * drive + rng.gauss(0.0, 1.5)
        temperature = 21.0 + 2.5 * drive + rng.gauss(0.0, 1.0)
        concentration = 87.0 + rng.gauss(0.0, 3.0)
        loss = 15.0 + 3.5 * drive + 0.1 * (concentration - 87.0) + rng.gauss(0.0, 1.2)
        rows.append([round(flow, 2), round(temperature, 2),
                     round(concentration, 2), round(loss, 2)])
    return ["flow", "temperature", "concentration", "loss"], rows


def spc_report_spec() -> dict:
    return {
        "id": "spc-report",
        "source": {"dataset": "spc-demo"},
        "blocks": [{"kind": "xbar_r", "params": {}, "min_level": 0,
                    "title": "Subgroup means and ranges"}],
    }


def pca_report_spec() -> dict:
    return {
        "id": "pca-report",
        "source": {"dataset": "pca-demo"},
        "blocks": [{"kind": "pca", "params": {"mode": "correlation"}, "min_level": 0,
                    "title": "Principal components (21 days of operation, synthetic)"}],
    }


def import_default(store: Store, example: str, *, overwrite: bool = False) -> list[tuple[str, str]]:
    """Install one example; returns (kind, id) pairs of everything created."""
    if example not in EXAMPLES:
        raise StoreError(f"unknown example {example!r}; expected one of {EXAMPLES}")
    created: list[tuple[str, str]] = []
    if example == "event":
        q = event_questionnaire()
        store.store_questionnaire(q, overwrite=overwrite)
        created.append(("questionnaire", q.id))
        spec_doc = event_report_spec()
        validate_spec(ReportSpec.from_dict(spec_doc), q)
        store.store_report_spec(spec_doc, overwrite=overwrite)
        created.append(("spec", spec_doc["id"]))
    elif example == "spc":
        columns, rows = spc_dataset()
        dsid = store.store_dataset("spc-demo", columns, rows, overwrite=overwrite)
        created.append(("dataset", dsid))
        spec_doc = spc_report_spec()
        validate_spec(ReportSpec.from_dict(spec_doc), store.load_dataset(dsid))
        store.store_report_spec(spec_doc, overwrite=overwrite)
        created.append(("spec", spec_doc["id"]))
    else:
        columns, rows = pca_dataset()
        dsid = store.store_dataset("pca-demo", columns, rows, overwrite=overwrite)
        created.append(("dataset", dsid))
        spec_doc = pca_report_spec()
        validate_spec(ReportSpec.from_dict(spec_doc), store.load_dataset(dsid))
        store.store_report_spec(spec_doc, overwrite=overwrite)
        created.append(("spec", spec_doc["id"]))
    return created
