"""Pipeline that automates a systematic literature review: plan, retrieve,
screen, extract, synthesize -- with deterministic offline execution and a
human adjudication loop at every stage."""

__version__ = "0.1.0"
