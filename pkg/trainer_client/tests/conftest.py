import json
import socket
import subprocess
import sys
import threading

import pytest

from trainer_client import ClientSession

# spawn the server through the interpreter so PATH quirks can't break CI
SERVER_CMD = (sys.executable, "-m", "sfr_kit", "serve")

NER_LABELS = ("location", "person", "organization")
RE_LABELS = ("founder", "ceo of")


@pytest.fixture(scope="session")
def schemas_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("schemas")
    (d / "conll.json").write_text(
        json.dumps({"task": "NER", "labels": list(NER_LABELS)}), encoding="utf-8"
    )
    (d / "founders.json").write_text(
        json.dumps({"task": "RE", "labels": list(RE_LABELS)}), encoding="utf-8"
    )
    return d


@pytest.fixture
def session(schemas_dir):
    client = ClientSession.spawn(
        SERVER_CMD,
        schemas=str(schemas_dir),
        workers=4,
        default_schema="conll",
        timeout=20.0,
        stderr=subprocess.DEVNULL,
    )
    yield client
    client.close()


def stub_session(handler, **kwargs):
    """ClientSession wired to an in-process fake server thread.

    ``handler`` gets the server end of a socketpair and speaks raw NDJSON;
    the returned session must be closed by the caller.
    """
    client_end, server_end = socket.socketpair()
    thread = threading.Thread(target=handler, args=(server_end,), daemon=True)
    thread.start()
    client = ClientSession(
        client_end.makefile("r", encoding="utf-8"),
        client_end.makefile("w", encoding="utf-8"),
        sock=client_end,
        **kwargs,
    )
    return client, thread
