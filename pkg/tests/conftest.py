import pytest

from metaprop.records import Repository, make_record


@pytest.fixture
def table1_repo():
    """The worked co-keyword pair: two shared keywords out of three each."""
    return Repository(
        [
            make_record("ni", {"key": ["repository", "metadata", "particle"]}),
            make_record("nj", {"key": ["images", "repository", "metadata"]}),
        ]
    )


@pytest.fixture
def chain_repo():
    """A cites B cites C; only A carries keyword metadata."""
    return Repository(
        [
            make_record("A", {"cite": ["B"], "key": ["x"]}),
            make_record("B", {"cite": ["C"]}),
            make_record("C", {}),
        ]
    )
