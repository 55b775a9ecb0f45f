"""Wire protocol and transports: serialization, echo, events, REST, WebSocket."""

import asyncio
import json

import pytest
from fastapi.testclient import TestClient

from luxdbg import Debugger
from luxdbg.service import DebugService, create_app


@pytest.fixture
def service():
    kernel = Debugger(stdout_write=lambda s: None)
    return DebugService(kernel)


def test_eval_echo_and_result(service):
    r = service.execute({"id": 1, "op": "eval", "cmd": "set x 41; incr x"})
    assert r == {"id": 1, "ok": True, "result": "42"}


def test_error_response_echoes_id(service):
    r = service.execute({"id": "abc", "op": "eval", "cmd": "nosuchcmd"})
    assert r["id"] == "abc" and r["ok"] is False
    assert "invalid command name" in r["error"]


def test_unknown_op(service):
    r = service.execute({"id": 2, "op": "frobnicate"})
    assert not r["ok"]


def test_console_service_equivalence(service, image_path):
    # the same command string yields the same result text both ways
    repl = Debugger(stdout_write=lambda s: None)
    for cmd in ("processor new lx16i p1 sim",
                f"p1 load {image_path('counted')}",
                "p1 stepi 4",
                "p1 ? R",
                "p1 fxpr r0 = 3 + 4"):
        via_service = service.execute({"id": 0, "op": "eval", "cmd": cmd})["result"]
        via_repl = repl.eval_command(cmd)
        assert via_service == via_repl, cmd


def test_stop_event_broadcast(service, image_path):
    events = []

    class Sess:
        id = 99
        subscribed = True
        queue = None

        def __init__(self):
            self.lines = events

    # use the kernel hook directly: broadcast fans out through sessions
    service.kernel.event_listeners.append(events.append)
    service.execute({"id": 1, "op": "eval", "cmd": "processor new lx16i p1 sim"})
    service.execute({"id": 2, "op": "eval",
                     "cmd": f"p1 load {image_path('counted')}"})
    service.execute({"id": 3, "op": "eval", "cmd": "p1 stop in targetFunc"})
    service.execute({"id": 4, "op": "eval", "cmd": "p1 resume"})
    stopped = [e for e in events if e.get("event") == "stopped"]
    assert stopped and stopped[0]["processor"] == "p1"
    assert stopped[0]["reason"] == "breakpoint"
    assert stopped[0]["bp"] == 1
    assert stopped[0]["pc"] == 10


def test_output_event_broadcast(service, image_path, lib_path):
    captured = []
    s = service.open_session()
    service.execute({"id": 0, "op": "eval", "cmd": f"source {lib_path('printf')}"})
    service.execute({"id": 1, "op": "eval", "cmd": "processor new lx16i p1 sim"})
    service.execute({"id": 2, "op": "eval",
                     "cmd": f"p1 load {image_path('printf')}"})
    service.execute({"id": 3, "op": "eval", "cmd": "p1 initPrintf"})
    service.execute({"id": 4, "op": "eval", "cmd": "p1 resume"})
    while not s.queue.empty():
        captured.append(json.loads(s.queue.get_nowait()))
    outputs = [e for e in captured if e.get("event") == "output"]
    assert any(e["text"] == "x=5" for e in outputs)


def test_shutdown_op(service):
    r = service.execute({"id": 9, "op": "shutdown"})
    assert r["ok"] and service.shutdown_event.is_set()


# ---------------------------------------------------------------------------
# serialized executor ordering

def test_two_session_serialization(service):
    async def scenario():
        s1 = service.open_session()
        s2 = service.open_session()
        ex = asyncio.ensure_future(service.executor())
        # interleave submissions from two sessions; per-session order holds
        await service.submit(s1, json.dumps({"id": 1, "op": "eval", "cmd": "set x 1"}))
        await service.submit(s2, json.dumps({"id": 1, "op": "eval", "cmd": "set x 2"}))
        await service.submit(s1, json.dumps({"id": 2, "op": "eval", "cmd": "set x"}))
        await service.submit(s2, json.dumps({"id": 2, "op": "eval", "cmd": "set x"}))
        await asyncio.sleep(0.05)
        ex.cancel()
        r1 = [json.loads(s1.queue.get_nowait()) for _ in range(s1.queue.qsize())]
        r2 = [json.loads(s2.queue.get_nowait()) for _ in range(s2.queue.qsize())]
        return r1, r2

    r1, r2 = asyncio.run(scenario())
    assert [m["id"] for m in r1] == [1, 2]
    assert [m["id"] for m in r2] == [1, 2]
    # arrival order executed: s1 set 1, s2 set 2, reads both see the last write
    assert r1[1]["result"] == "2" and r2[1]["result"] == "2"


def test_malformed_line_parse_error(service):
    async def scenario():
        s = service.open_session()
        await service.submit(s, "this is not json")
        return json.loads(s.queue.get_nowait())

    msg = asyncio.run(scenario())
    assert msg == {"id": None, "ok": False, "error": "parse"}


# ---------------------------------------------------------------------------
# TCP transport

def test_tcp_round_trip(image_path):
    async def scenario():
        kernel = Debugger(stdout_write=lambda s: None)
        service = DebugService(kernel)
        server = await asyncio.start_server(service.handle_tcp, "127.0.0.1", 0)
        port = server.sockets[0].getsockname()[1]
        ex = asyncio.ensure_future(service.executor())

        reader, writer = await asyncio.open_connection("127.0.0.1", port)

        async def rpc(obj):
            writer.write((json.dumps(obj) + "\n").encode())
            await writer.drain()
            while True:
                line = await asyncio.wait_for(reader.readline(), 5)
                msg = json.loads(line)
                if "event" not in msg:
                    return msg

        r = await rpc({"id": 1, "op": "eval", "cmd": "processor new lx16i p1 sim"})
        assert r == {"id": 1, "ok": True, "result": "p1"}
        r = await rpc({"id": 2, "op": "eval", "cmd": f"p1 load {image_path('counted')}"})
        assert r["ok"]
        r = await rpc({"id": 3, "op": "eval", "cmd": "p1 stepi"})
        assert r["ok"]
        r = await rpc({"id": 4, "op": "eval", "cmd": "p1 pc"})
        assert r["result"] == "1"
        writer.close()
        server.close()
        await server.wait_closed()
        ex.cancel()

    asyncio.run(scenario())


def test_tcp_event_stream(image_path):
    async def scenario():
        kernel = Debugger(stdout_write=lambda s: None)
        service = DebugService(kernel)
        server = await asyncio.start_server(service.handle_tcp, "127.0.0.1", 0)
        port = server.sockets[0].getsockname()[1]
        ex = asyncio.ensure_future(service.executor())
        reader, writer = await asyncio.open_connection("127.0.0.1", port)

        for i, cmd in enumerate([
            "processor new lx16i p1 sim",
            f"p1 load {image_path('counted')}",
            "p1 stop in targetFunc",
            "p1 resume",
        ]):
            writer.write((json.dumps({"id": i, "op": "eval", "cmd": cmd}) + "\n").encode())
        await writer.drain()
        messages = []
        while True:
            line = await asyncio.wait_for(reader.readline(), 5)
            msg = json.loads(line)
            messages.append(msg)
            if msg.get("id") == 3:
                break
        writer.close()
        server.close()
        await server.wait_closed()
        ex.cancel()
        return messages

    messages = asyncio.run(scenario())
    stopped = [m for m in messages if m.get("event") == "stopped"]
    assert stopped and stopped[-1]["reason"] == "breakpoint"
    # events carry no id
    assert all("id" not in m for m in stopped)


# ---------------------------------------------------------------------------
# HTTP app

@pytest.fixture
def client(service):
    with TestClient(create_app(service)) as c:
        yield c


def test_rest_eval(client):
    r = client.post("/eval", json={"id": 1, "cmd": "processor new lx16i p1 sim"})
    assert r.status_code == 200
    assert r.json() == {"id": 1, "ok": True, "result": "p1", "error": None}


def test_rest_processors_and_registers(client, image_path):
    client.post("/eval", json={"cmd": "processor new lx16i p1 sim"})
    client.post("/eval", json={"cmd": f"p1 load {image_path('counted')}"})
    client.post("/eval", json={"cmd": "p1 stepi 2"})
    procs = client.get("/processors").json()
    assert procs[0]["name"] == "p1" and procs[0]["model"] == "lx16i"
    assert procs[0]["pc"] == 2
    regs = client.get("/processors/p1/registers").json()
    assert regs[0] == {"name": "pc", "value": 2, "sign": "u", "width": 20}
    assert "cycles" not in [r["name"] for r in regs]


def test_rest_health(client):
    assert client.get("/health").json() == {"ok": True}


def test_websocket_protocol(client, image_path):
    with client.websocket_connect("/ws") as ws:
        ws.send_text(json.dumps({"id": 1, "op": "eval",
                                 "cmd": "processor new lx16i w1 sim"}))
        msg = json.loads(ws.receive_text())
        assert msg == {"id": 1, "ok": True, "result": "w1"}
        ws.send_text(json.dumps({"id": 2, "op": "eval",
                                 "cmd": f"w1 load {image_path('counted')}"}))
        assert json.loads(ws.receive_text())["ok"]
        ws.send_text(json.dumps({"id": 3, "op": "eval", "cmd": "w1 stop in targetFunc"}))
        assert json.loads(ws.receive_text())["ok"]
        ws.send_text(json.dumps({"id": 4, "op": "eval", "cmd": "w1 resume"}))
        got_stopped = False
        while True:
            msg = json.loads(ws.receive_text())
            if msg.get("event") == "stopped":
                got_stopped = True
            if msg.get("id") == 4:
                break
        assert got_stopped