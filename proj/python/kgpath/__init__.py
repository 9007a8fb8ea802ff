"""Relation-path planning, retrieval and evaluation over knowledge graphs."""

from ._core import (
    DataError,
    Graph,
    KgpathError,
    TransportError,
    aggregate_scores,
    format_paths,
    normalize_answer,
    parse_answer_list,
    parse_plan,
    planning_loss,
    planning_prompt,
    raw_endpoint_answers,
    reasoning_prompt,
    retrieve,
    score_question,
    serialize_plan,
    shortest_relation_paths,
    vote_answers,
)

__all__ = [
    "DataError",
    "Graph",
    "KgpathError",
    "TransportError",
    "aggregate_scores",
    "format_paths",
    "normalize_answer",
    "parse_answer_list",
    "parse_plan",
    "planning_loss",
    "planning_prompt",
    "raw_endpoint_answers",
    "reasoning_prompt",
    "retrieve",
    "score_question",
    "serialize_plan",
    "shortest_relation_paths",
    "vote_answers",
]
