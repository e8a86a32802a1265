"""Shared fixtures: the worked wire-format examples and their schemas."""

import json

import pytest

from sfr_kit import Task, TaskSchema

NER_LABELS = ("location", "person", "organization")
NER_INPUT = (
    "Best wishes to Kevin , Therese & their family as they embark on the next stage of their lives . JG"
)
# pretty-printed source rendering, trailing spaces included
NER_OUTPUT_PRETTY = '{\n  "location": "", \n  "person": "Kevin | Therese", \n  "organization": ""\n}'

RE_LABELS = ("conjunction", "feature of", "hyponym of", "used for", "part of", "compare", "evaluate for")
RE_INPUT = (
    "Instead of representing scene/object by a collection of isolated 3D features -LRB- usually points "
    "-RRB- , our algorithm uses a surface controlled by a small set of parameters ."
)
RE_OUTPUT_PRETTY = (
    '{\n  "conjunction": "",\n  "feature of": "",\n  "hyponym of": "",\n  "used for": "surface, algorithm",'
    '\n  "part of": "",\n  "compare": "",\n  "evaluate for": ""\n}'
)
RE_OUTPUT_CONCISE = '{"used for": "surface, algorithm"}'

EE_LABELS = ("potential therapeutic event", "adverse event")
EE_ROLES = ("Subject", "Effect", "Treatment", "Treatment.Drug", "Treatment.Time_elapsed")
EE_INPUT = (
    "After 5 days of treatment with IL-2, the patient developed a hemorrhagic lesion that progressed to "
    "toxic epidermal necrolysis, as well as grade 4 pancytopenia."
)
EE_VALUE = (
    "developed: Subject: patient; Effect: a hemorrhagic lesion that progressed to toxic epidermal "
    "necrolysis, as well as grade 4 pancytopenia; Treatment: 5 days of treatment with IL-2; "
    "Treatment.Drug: IL-2; Treatment.Time_elapsed: After 5 days"
)
EE_OUTPUT_PRETTY = '{\n"potential therapeutic event": "",\n"adverse event": "' + EE_VALUE + '"\n}'
EE_OUTPUT_CONCISE = '{\n"adverse event": "' + EE_VALUE + '"\n}'

RULES_INPUT = "Labeled data is replaced by a few hand-crafted rules that encode basic syntactic knowledge ."
RULES_OUTPUT_FULL = (
    '{\n  "conjunction":"",\n  "feature of":"",\n  "hyponym of":"",\n'
    '  "used for":"hand-crafted rules, basic syntactic knowledge",\n'
    '  "part of":"",\n  "compare":"",\n  "evaluate for":""\n}'
)
RULES_OUTPUT_CONCISE = '{\n  "used for":"hand-crafted rules, basic syntactic knowledge"\n}'


def canonical(text: str) -> str:
    """Whitespace-trim normalization: reflow a JSON object through the stdlib."""
    return json.dumps(json.loads(text), ensure_ascii=False)


@pytest.fixture
def ner_schema() -> TaskSchema:
    return TaskSchema(Task.NER, NER_LABELS)


@pytest.fixture
def re_schema() -> TaskSchema:
    return TaskSchema(Task.RE, RE_LABELS)


@pytest.fixture
def ee_schema() -> TaskSchema:
    return TaskSchema(Task.EE, EE_LABELS, EE_ROLES)
