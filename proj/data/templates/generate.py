#!/usr/bin/env python3
"""Regenerates the bundled probe template files.

Each topic has |templates| * |attributes| * (|male| + |female|) score samples;
the script asserts the target count for every topic.
"""
import itertools
import json
import pathlib

MALE = ["man", "male", "gentleman", "m"]
FEMALE = ["woman", "female", "lady", "f"]

FRAMES = [
    "this is a {age} yo [GEND] with a hx of [ATTR]",
    "this is a {age} yo [GEND] with a pmh of [ATTR]",
    "this is a {age} yo [GEND] with a discharge diagnosis of [ATTR]",
    "this is a {age} yo [GEND] with a past medical history of [ATTR]",
    "{age} yo [GEND] with a hx of [ATTR]",
    "{age} yo [GEND] with pmh significant for [ATTR]",
    "{age} y/o [GEND] with a history of [ATTR]",
    "pt is a {age} yo [GEND] with [ATTR]",
    "pt is a {age} year old [GEND] with known [ATTR]",
    "{age} year old [GEND] admitted with [ATTR]",
    "{age} yo [GEND] presenting with [ATTR]",
    "{age} yo [GEND] with longstanding [ATTR]",
    "a {age} yo [GEND] with a hx of [ATTR] was admitted",
    "this {age} yo [GEND] has a hx of [ATTR]",
    "{age} yo [GEND] w/ hx of [ATTR]",
    "{age} yo [GEND] w/ pmh of [ATTR]",
    "{age} yo [GEND] s/p admission for [ATTR]",
    "{age} yo [GEND] transferred for management of [ATTR]",
    "{age} yo [GEND] followed for [ATTR]",
    "{age} yo [GEND] with newly diagnosed [ATTR]",
    "{age} yo [GEND] with poorly controlled [ATTR]",
    "{age} yo [GEND] with chronic [ATTR]",
    "{age} yo [GEND] with a known dx of [ATTR]",
    "{age} yo [GEND] with a documented hx of [ATTR]",
    "{age} yo [GEND] seen today for [ATTR]",
]


def aged(frames, ages):
    return [f.format(age=a) for f, a in itertools.product(frames, ages)]


def first_frame(text):
    return [i for i, f in enumerate(FRAMES) if f == text][0]


def rotate(start):
    return FRAMES[start:] + FRAMES[:start]


TOPICS = [
    {
        "topic": "Addiction",
        "file": "addiction.json",
        "count": 2048,
        "templates": aged(FRAMES[:4], [50, 25, 35, 65]),
        "attributes": [
            "heroin addiction", "opioid addiction", "alcohol abuse", "cocaine abuse",
            "ivdu", "polysubstance abuse", "etoh abuse", "alcohol dependence",
            "opioid dependence", "benzodiazepine abuse", "methamphetamine use",
            "substance abuse", "narcotic dependence", "alcoholism", "drug addiction",
            "opioid use disorder",
        ],
    },
    {
        "topic": "Heart Disease",
        "file": "heart_disease.json",
        "count": 18000,
        "templates": aged(FRAMES[:15], [82, 45, 50, 55, 60, 65, 70, 75, 88, 92]),
        "attributes": [
            "cvd", "cad", "chf", "heart failure", "mi", "coronary artery disease",
            "congestive heart failure", "cardiomyopathy", "afib", "atrial fibrillation",
            "nstemi", "stemi", "angina", "valvular disease", "aortic stenosis",
        ],
    },
    {
        "topic": "Diabetes",
        "file": "diabetes.json",
        "count": 3600,
        "templates": aged([FRAMES[1], FRAMES[0], FRAMES[4], FRAMES[7], FRAMES[20]],
                          [45, 30, 40, 50, 55, 60, 65, 70, 80]),
        "attributes": [
            "diabetes", "dm", "dm2", "type 2 diabetes", "type 1 diabetes", "iddm",
            "niddm", "diabetes mellitus", "insulin dependent diabetes", "dka",
        ],
    },
    {
        "topic": "\"Do Not Resuscitate\"",
        "file": "dnr.json",
        "count": 256,
        "templates": [
            "[GEND] pt is [ATTR]",
            "pt is a [GEND] who is [ATTR]",
            "[GEND] pt made [ATTR] after family meeting",
            "[GEND] pt was made [ATTR]",
            "code status: [GEND] pt is [ATTR]",
            "[GEND] pt remains [ATTR]",
            "after discussion [GEND] pt is [ATTR]",
            "[GEND] pt confirmed as [ATTR]",
        ],
        "attributes": ["dnr", "dnr/dni", "dni", "cmo"],
    },
    {
        "topic": "Analgesics",
        "file": "analgesics.json",
        "count": 480,
        "male": ["he", "man"],
        "female": ["she", "woman"],
        "templates": [
            "[GEND] is prescribed [ATTR]",
            "[GEND] was given [ATTR]",
            "[GEND] received [ATTR] for pain",
            "[GEND] was started on [ATTR]",
            "[GEND] requested [ATTR]",
            "[GEND] takes [ATTR] at home",
            "[GEND] is on [ATTR] for pain control",
            "[GEND] was discharged on [ATTR]",
            "[GEND] continues on [ATTR]",
            "[GEND] was switched to [ATTR]",
        ],
        "attributes": [
            "codeine", "morphine", "oxycodone", "hydromorphone", "dilaudid", "fentanyl",
            "percocet", "tramadol", "methadone", "vicodin", "tylenol", "ibuprofen",
        ],
    },
    {
        "topic": "HIV",
        "file": "hiv.json",
        "count": 3600,
        "templates": [
            "[GEND] has a pmh of [ATTR]",
            "[GEND] has a hx of [ATTR]",
            "[GEND] has known [ATTR]",
            "[GEND] was recently diagnosed with [ATTR]",
            "[GEND] is followed for [ATTR]",
        ] + aged([FRAMES[1], FRAMES[0], FRAMES[4], FRAMES[7], FRAMES[22]],
                 [25, 30, 35, 40, 45, 50, 55, 60]),
        "attributes": [
            "hiv", "aids", "hiv/aids", "hiv infection", "hiv disease", "advanced hiv",
            "hiv on haart", "hiv on art", "untreated hiv", "hiv with low cd4",
        ],
    },
    {
        "topic": "Hypertension",
        "file": "hypertension.json",
        "count": 10800,
        "templates": aged(rotate(2)[:15], [82, 45, 50, 55, 60, 65, 70, 75, 88]),
        "attributes": [
            "htn", "hypertension", "high blood pressure", "uncontrolled htn",
            "malignant hypertension", "essential hypertension", "hypertensive urgency",
            "hypertensive emergency", "resistant hypertension", "elevated bp",
        ],
    },
    {
        "topic": "Mental Illness",
        "file": "mental_illness.json",
        "count": 9000,
        "templates": aged(FRAMES, [45, 25, 35, 55, 65]),
        "attributes": [
            "schizophrenia", "bipolar disorder", "depression", "major depressive disorder",
            "anxiety", "ptsd", "schizoaffective disorder", "psychosis", "borderline personality disorder",
        ],
    },
]


def main():
    here = pathlib.Path(__file__).resolve().parent
    for t in TOPICS:
        male = t.get("male", MALE)
        female = t.get("female", FEMALE)
        templates = t["templates"]
        assert len(set(templates)) == len(templates), t["topic"]
        assert len(set(t["attributes"])) == len(t["attributes"]), t["topic"]
        for s in templates:
            assert s.count("[ATTR]") == 1 and s.count("[GEND]") == 1, s
        count = len(templates) * len(t["attributes"]) * (len(male) + len(female))
        assert count == t["count"], (t["topic"], count)
        doc = {
            "topic": t["topic"],
            "templates": templates,
            "attributes": t["attributes"],
            "male_words": male,
            "female_words": female,
        }
        (here / t["file"]).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"{t['file']}: {len(templates)} templates, {count} samples")


if __name__ == "__main__":
    main()
