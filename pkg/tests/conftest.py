import pytest

from statboard.survey import Question, Questionnaire


@pytest.fixture
def store(tmp_path):
    from statboard.store import Store

    return Store(tmp_path / "data")


@pytest.fixture
def likert_questionnaire():
    questions = tuple(
        Question(id=f"q{i}", prompt=f"Statement {i}", kind="likert5") for i in range(1, 12)
    )
    return Questionnaire(id="event", title="Event evaluation", questions=questions)


@pytest.fixture
def mixed_questionnaire():
    return Questionnaire(
        id="mixed",
        title="Mixed kinds",
        questions=(
            Question(id="lik", prompt="Agreement", kind="likert5"),
            Question(id="pick", prompt="Pick one", kind="choice",
                     options=("red", "green", "blue")),
            Question(id="num", prompt="A number", kind="numeric"),
            Question(id="txt", prompt="Comments", kind="free_text", required=False),
        ),
    )
