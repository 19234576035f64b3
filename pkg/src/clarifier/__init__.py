"""Intent disambiguation engine for task-oriented dialogue.

Classifies utterances into intents, detects two-intent ambiguity from
calibrated confidences, asks a single discriminative clarifying question
(generated from question-answer pairs, with a phrase-template fallback),
and resolves the user's reply into one of the two candidate intents or
neither.
"""

from clarifier.engine import Engine, EngineConfig, build_engine, load_engine

__all__ = ["Engine", "EngineConfig", "build_engine", "load_engine"]
__version__ = "0.1.0"
