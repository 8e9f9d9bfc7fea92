#!/usr/bin/env python3
"""Regenerate the canned fixtures: the offline provider corpus, the demo
protocol, and the mock scenarios. Run from the repo root:

    python3 tools/make_fixtures.py
"""

import json
from pathlib import Path

from slrpipe.domain import make_record_id

ROOT = Path(__file__).resolve().parents[1] / "fixtures"

INCLUDED = [
    {
        "title": "InferLink End-to-End Program Repair with Large Language Models",
        "authors": ["M. Sobo", "T. Lahtinen"],
        "url": "https://example.org/papers/inferlink-2023",
        "venue": "Journal of Systems and Software",
        "doi": "10.5555/inferlink.2023",
        "paper_type": "journal-article",
        "affiliation_country": "Finland",
        "affiliation_institution": "Tampere University",
        "year": 2023,
        "abstract": (
            "Automated program repair remains a central challenge in software "
            "engineering. We present InferLink, an end-to-end pipeline that uses "
            "large language models to localize faults and synthesize candidate "
            "patches. On a benchmark of real defects, large language models repaired "
            "62 percent of single-hunk bugs. We discuss prompt design, patch "
            "validation, and the limits of model-generated fixes."
        ),
    },
    {
        "title": "Automated Unit Test Generation with Large Language Models",
        "authors": ["R. Okafor", "S. Lindgren", "P. Virtanen"],
        "url": "https://example.org/papers/testgen-2023",
        "venue": "Empirical Software Engineering",
        "doi": "10.5555/testgen.2023",
        "paper_type": "journal-article",
        "affiliation_country": "Sweden",
        "affiliation_institution": "KTH Royal Institute of Technology",
        "year": 2023,
        "abstract": (
            "We study whether large language models can generate effective unit "
            "tests for industrial codebases. Across 14 projects the generated "
            "suites reached a median branch coverage of 71 percent. The main "
            "challenges were flaky assertions and hallucinated APIs, which limit "
            "unsupervised adoption of large language models in testing workflows."
        ),
    },
    {
        "title": "Large Language Models for Code Review Automation",
        "authors": ["A. Duarte", "K. Yamamoto"],
        "url": "https://example.org/papers/review-2023",
        "venue": "International Conference on Software Engineering",
        "doi": "10.5555/review.2023",
        "paper_type": "proceedings-article",
        "affiliation_country": "Japan",
        "affiliation_institution": "Kyoto University",
        "year": 2023,
        "abstract": (
            "Code review is effort-intensive. We evaluate large language models as "
            "assistant reviewers that draft comments on pull requests. Reviewers "
            "accepted 48 percent of model-drafted comments. Adoption barriers "
            "include limited repository context and the cost of verifying model "
            "suggestions during software development."
        ),
    },
]

EXCLUDED = [
    ("Neural Machine Translation Quality Estimation",
     "Universitat Politecnica de Valencia", "Spain",
     "Quality estimation predicts translation quality without references."),
    ("A Taxonomy of Microservice Migration Patterns",
     "University of Bologna", "Italy",
     "We catalogue recurring migration patterns from monoliths to microservices."),
    ("Static Analysis of Rust Memory Safety",
     "ETH Zurich", "Switzerland",
     "We verify unsafe Rust blocks with a refined points-to analysis."),
    ("Continuous Integration Practices in Open Source",
     "University of Victoria", "Canada",
     "A mining study of CI adoption across 4,000 repositories."),
    ("Quantum Computing for Combinatorial Optimization",
     "Delft University of Technology", "Netherlands",
     "We benchmark QAOA against classical heuristics on MaxCut."),
    ("User Experience Evaluation of Mobile Banking Apps",
     "University of Cape Town", "South Africa",
     "A usability study of twelve mobile banking applications."),
    ("Energy-Aware Scheduling in Cloud Data Centers",
     "Tsinghua University", "China",
     "We reduce energy consumption via thermal-aware VM placement."),
]


def build_records():
    records = []
    for rec in INCLUDED:
        records.append(dict(rec))
    for i, (title, inst, country, abstract) in enumerate(EXCLUDED):
        records.append(
            {
                "title": title,
                "authors": [f"Author {i + 1}A", f"Author {i + 1}B"],
                "url": f"https://example.org/papers/other-{i + 1}",
                "venue": "Misc Conference Proceedings",
                "doi": f"10.5555/other.{i + 1}.2023",
                "paper_type": "proceedings-article",
                "affiliation_country": country,
                "affiliation_institution": inst,
                "year": 2023,
                "abstract": abstract,
            }
        )
    return records


DEMO_TOPIC = "large language models in software development"

QUESTIONS = [
    {
        "id": "RQ1",
        "text": (
            "How have large language models been utilized in various aspects "
            "of the software development process?"
        ),
        "purpose": "Map where large language models are applied across the development lifecycle.",
    },
    {
        "id": "RQ2",
        "text": (
            "What challenges and limitations exist in the adoption and "
            "implementation of large language models in software development?"
        ),
        "purpose": "Identify barriers that currently limit adoption in practice.",
    },
]


def title_key(title):
    # A short distinctive substring for scenario matching.
    return title.split()[0]


def demo_scenario(records, fabricate_quotes=False):
    ids = {r["title"]: make_record_id(r["title"], r["doi"]) for r in records}
    included_ids = [ids[r["title"]] for r in INCLUDED]
    entries = [
        {
            "template_id": "gen_questions",
            "match": {"topic": "large language models"},
            "responses": [{"questions": QUESTIONS}],
            "repeat": True,
        },
        {
            "template_id": "gen_query",
            "match": {"topic": "large language models"},
            "responses": [{"query": "large language models OR software development"}],
            "repeat": True,
        },
    ]
    for title, *_rest in [(t[0],) for t in EXCLUDED]:
        entries.append(
            {
                "template_id": "screen_title",
                "match": {"title": title_key(title)},
                "responses": [
                    {
                        "verdict": "exclude",
                        "rationale": "Title is not about large language models in software development.",
                    }
                ],
                "repeat": True,
            }
        )
    summaries = {
        "InferLink": (
            "InferLink chains fault localization and patch synthesis with large "
            "language models, repairing 62 percent of single-hunk bugs in the "
            "benchmark while relying on automated patch validation."
        ),
        "Automated": (
            "Model-generated unit tests reached a median branch coverage of 71 "
            "percent across 14 industrial projects, with flaky assertions and "
            "hallucinated APIs as the dominant failure modes."
        ),
        "Large": (
            "Used as assistant reviewers, large language models drafted pull-request "
            "comments of which 48 percent were accepted; missing repository context "
            "was the main limitation."
        ),
    }
    for rec in INCLUDED:
        key = title_key(rec["title"])
        entries.append(
            {
                "template_id": "summarize",
                "match": {"title": key},
                "responses": [{"summary": summaries[key]}],
                "repeat": True,
            }
        )
    answers = {
        "InferLink": {
            "RQ1": {
                "answer": (
                    "Large language models are used for automated program repair: "
                    "InferLink localizes faults and synthesizes candidate patches "
                    "end to end."
                ),
                "support_quote": "uses large language models to localize faults and synthesize candidate patches"
                if not fabricate_quotes
                else "large language models repaired every bug in the benchmark without validation",
                "confidence": "high",
            },
            "RQ2": {
                "answer": (
                    "Patch validation effort and the limits of model-generated "
                    "fixes constrain unsupervised use."
                ),
                "support_quote": "the limits of model-generated fixes",
                "confidence": "medium",
            },
        },
        "Automated": {
            "RQ1": {
                "answer": "They generate unit tests for industrial codebases with useful coverage.",
                "support_quote": "generate effective unit "
                "tests for industrial codebases",
                "confidence": "high",
            },
            "RQ2": {
                "answer": "Flaky assertions and hallucinated APIs limit unsupervised adoption.",
                "support_quote": "flaky assertions and hallucinated APIs",
                "confidence": "high",
            },
        },
        "Large": {
            "RQ1": {
                "answer": "They draft code-review comments on pull requests as assistant reviewers.",
                "support_quote": "assistant reviewers that draft comments on pull requests",
                "confidence": "high",
            },
            "RQ2": {
                "answer": "Limited repository context and verification cost are adoption barriers.",
                "support_quote": "limited repository context and the cost of verifying model "
                "suggestions",
                "confidence": "medium",
            },
        },
    }
    for rec in INCLUDED:
        key = title_key(rec["title"])
        entries.append(
            {
                "template_id": "extract_answers",
                "match": {"title": key},
                "responses": [{"answers": answers[key]}],
                "repeat": True,
            }
        )
    entries.append(
        {
            "template_id": "synthesize",
            "match": {"question": "utilized"},
            "responses": [
                {
                    "synthesis": (
                        "Across the included studies, large language models support "
                        "program repair (InferLink End-to-End Program Repair with "
                        "Large Language Models), unit test generation, and code "
                        "review assistance, spanning implementation and verification "
                        "activities of the software development lifecycle."
                    ),
                    "gap_notes": "No included study covers requirements or design activities.",
                    "citations": included_ids,
                }
            ],
            "repeat": True,
        }
    )
    entries.append(
        {
            "template_id": "synthesize",
            "match": {"question": "challenges"},
            "responses": [
                {
                    "synthesis": (
                        "Reported limitations converge on verification cost: "
                        "model-generated patches, tests and review comments all "
                        "require human checking, and hallucinated APIs or missing "
                        "repository context reduce trust."
                    ),
                    "gap_notes": "Long-term maintenance effects remain unstudied.",
                    "citations": included_ids,
                }
            ],
            "repeat": True,
        }
    )
    entries.append(
        {
            "template_id": "synthesize",
            "match": {"question": "trends"},
            "responses": [
                {
                    "synthesis": (
                        "The field is converging on assistant-style integration of "
                        "large language models into existing workflows, with "
                        "verification cost as the recurring open problem."
                    ),
                    "gap_notes": "Evidence is concentrated on code-centric tasks.",
                    "citations": ["RQ1", "RQ2"],
                }
            ],
            "repeat": True,
        }
    )
    return {"name": "paper_demo" if not fabricate_quotes else "adversarial_quotes",
            "entries": entries}


def main():
    records = build_records()
    provider_dir = ROOT / "providers" / "fixture"
    provider_dir.mkdir(parents=True, exist_ok=True)
    page = {"items": records, "next_page": None}
    (provider_dir / "1.json").write_text(json.dumps(page, indent=2) + "\n")

    (ROOT / "scenarios").mkdir(parents=True, exist_ok=True)
    (ROOT / "scenarios" / "paper_demo.json").write_text(
        json.dumps(demo_scenario(records), indent=2) + "\n"
    )
    (ROOT / "scenarios" / "adversarial_quotes.json").write_text(
        json.dumps(demo_scenario(records, fabricate_quotes=True), indent=2) + "\n"
    )

    protocol = {
        "topic": DEMO_TOPIC,
        "objective": (
            "Survey how large language models are used across the software "
            "development process and what limits their adoption."
        ),
        "questions": [],
        "query": None,
        "year_range": {"start": 2023, "end": 2023},
        "max_records": 10,
        "criteria": {
            "include_keywords": ["large language model"],
            "exclude_keywords": [],
            "require_abstract": False,
            "language_allowlist": [],
        },
        "replication_mode": "paper_faithful",
    }
    (ROOT / "demo_protocol.json").write_text(json.dumps(protocol, indent=2) + "\n")
    print("fixtures written under", ROOT)


if __name__ == "__main__":
    main()
