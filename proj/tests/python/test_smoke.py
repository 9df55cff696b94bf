import os
import sys

sys.path.insert(0, os.environ.get("DOCKMETA_PY_SRC", "python"))

import dockmeta


DOCKERFILE = """FROM ubuntu:20.04
ARG FOO_VERSION=v1.2
RUN wget https://github.com/acme/libfoo/archive/${FOO_VERSION}.tar.gz
"""


def test_parse_dockerfile():
    ast = dockmeta.parse_dockerfile(DOCKERFILE)
    assert ast["valid"]
    keywords = [i["keyword"] for i in ast["instructions"]]
    assert keywords == ["FROM", "ARG", "RUN"]


def test_extract_and_match():
    urls = dockmeta.extract_urls(DOCKERFILE)
    assert len(urls) == 1
    url = urls[0]
    assert url["url"] == "https://github.com/acme/libfoo/archive/v1.2.tar.gz"
    assert url["fully_resolved"]
    assert url["variables"] == ["FOO_VERSION"]
    match = dockmeta.match_github_url(url["url"])
    assert match == {
        "package": "acme/libfoo",
        "tag": "v1.2",
        "pattern": "archive",
        "asset_file": None,
    }


def test_match_rejects_other_urls():
    assert dockmeta.match_github_url("https://example.com/a/b/archive/v1.zip") is None


def test_version_sort():
    tags = ["v10", "v2", "v1.10", "v1.2"]
    assert dockmeta.version_sort(tags) == ["v1.2", "v1.10", "v2", "v10"]


def test_unified_diff():
    diff = dockmeta.unified_diff("Dockerfile", "a\nb\n", "a\nc\n")
    assert "--- a/Dockerfile" in diff
    assert "+++ b/Dockerfile" in diff
    assert "-b" in diff and "+c" in diff


def test_stage_rejects_missing_corpus(tmp_path):
    result = dockmeta.scan(
        corpus=str(tmp_path / "missing"),
        registry_fixture=str(tmp_path / "missing.json"),
        out=str(tmp_path / "out"),
    )
    assert result["exit_code"] == 2
