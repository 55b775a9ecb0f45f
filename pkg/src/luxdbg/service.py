"""Service layer: the wire protocol and its transports.

One JSON object per message. Requests carry {id, op, cmd}; responses echo the
id with ok/result or ok/error; asynchronous target events and semi-hosted
output are broadcast to subscribed sessions and carry no id. Requests from
all sessions are executed serially, in arrival order, on the kernel loop.

Transports: newline-delimited JSON over TCP (`--listen`) and a FastAPI app
(`--http`) exposing the same protocol over a WebSocket at /ws plus a small
REST surface for simple clients.
"""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from typing import Optional, Union

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .errors import ScriptError
from .interp import ExitScript
from .kernel import Debugger


class EvalRequest(BaseModel):
    id: Union[int, str, None] = None
    op: str = "eval"
    cmd: str = ""


class EvalResponse(BaseModel):
    id: Union[int, str, None] = None
    ok: bool
    result: Optional[str] = None
    error: Optional[str] = None


class ProcessorInfo(BaseModel):
    name: str
    model: str
    mode: str
    run_state: str
    pc: int


class RegisterInfo(BaseModel):
    name: str
    value: int
    sign: str
    width: int


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


class _Session:
    def __init__(self, sid: int):
        self.id = sid
        self.queue: asyncio.Queue = asyncio.Queue()
        self.subscribed = True

    def send(self, message: dict):
        self.queue.put_nowait(_dumps(message))


class DebugService:
    """Serializes client requests onto the kernel and fans events back out."""

    def __init__(self, kernel: Debugger):
        self.kernel = kernel
        self.sessions: dict[int, _Session] = {}
        self._session_seq = 0
        self.requests: asyncio.Queue = asyncio.Queue()
        self.shutdown_event = asyncio.Event()
        self._executor_task: Optional[asyncio.Task] = None
        kernel.event_listeners.append(self._broadcast)
        kernel.add_output_hook(self._broadcast_output)

    def ensure_executor(self) -> asyncio.Task:
        """Start the single request consumer on the running loop, once."""
        if self._executor_task is None or self._executor_task.done():
            self._executor_task = asyncio.ensure_future(self.executor())
        return self._executor_task

    # -- sessions

    def open_session(self) -> _Session:
        self._session_seq += 1
        s = _Session(self._session_seq)
        self.sessions[s.id] = s
        return s

    def close_session(self, s: _Session):
        self.sessions.pop(s.id, None)

    # -- broadcast fan-out

    def _broadcast(self, message: dict):
        line = _dumps(message)
        for s in self.sessions.values():
            if s.subscribed:
                s.queue.put_nowait(line)

    def _broadcast_output(self, text: str):
        self._broadcast({"event": "output", "text": text})

    # -- request execution

    def execute(self, obj: dict) -> dict:
        """Run one request synchronously; returns the response dict."""
        rid = obj.get("id")
        op = obj.get("op")
        if op == "eval":
            try:
                result = self.kernel.eval_command(obj.get("cmd", ""))
                return {"id": rid, "ok": True, "result": result}
            except ScriptError as e:
                return {"id": rid, "ok": False, "error": e.message}
            except ExitScript:
                return {"id": rid, "ok": False, "error": "exit is not available here"}
        if op == "shutdown":
            self.shutdown_event.set()
            return {"id": rid, "ok": True, "result": "shutdown"}
        if op in ("subscribe", "unsubscribe"):
            return {"id": rid, "ok": True, "result": op}
        return {"id": rid, "ok": False, "error": f"unknown op {op!r}"}

    async def executor(self):
        """Single consumer: requests from every session, strictly in arrival order."""
        while True:
            session, obj = await self.requests.get()
            if obj.get("op") in ("subscribe", "unsubscribe"):
                session.subscribed = obj["op"] == "subscribe"
            response = self.execute(obj)
            session.send(response)
            if self.shutdown_event.is_set():
                return

    async def submit(self, session: _Session, raw_line: str):
        try:
            obj = json.loads(raw_line)
            if not isinstance(obj, dict):
                raise ValueError
        except ValueError:
            session.send({"id": None, "ok": False, "error": "parse"})
            return
        await self.requests.put((session, obj))

    # -- TCP transport

    async def handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        session = self.open_session()

        async def sender():
            while True:
                line = await session.queue.get()
                writer.write(line.encode("utf-8") + b"\n")
                await writer.drain()

        sender_task = asyncio.ensure_future(sender())
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                text = line.decode("utf-8", errors="replace").strip()
                if text:
                    await self.submit(session, text)
        except (ConnectionResetError, asyncio.CancelledError):
            pass
        finally:
            sender_task.cancel()
            self.close_session(session)
            try:
                writer.close()
            except Exception:
                pass


def create_app(service: DebugService) -> FastAPI:
    """HTTP face of the service: REST for one-shot calls, /ws for the full protocol."""

    @asynccontextmanager
    async def lifespan(_app):
        service.ensure_executor()
        yield

    app = FastAPI(title="luxdbg service", lifespan=lifespan)

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/eval", response_model=EvalResponse)
    def eval_cmd(request: EvalRequest):
        return service.execute({"id": request.id, "op": "eval", "cmd": request.cmd})

    @app.get("/processors", response_model=list[ProcessorInfo])
    def processors():
        return [
            ProcessorInfo(name=c.instance_name, model=c.model, mode=c.mode,
                          run_state=c.run_state, pc=c.pc)
            for c in service.kernel.cores.values()
        ]

    @app.get("/processors/{name}/registers", response_model=list[RegisterInfo])
    def registers(name: str):
        core = service.kernel.core_named(name)
        return [RegisterInfo(name=n, value=v, sign=s, width=w)
                for n, v, s, w in core.reflect("registers")]

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = service.open_session()

        async def sender():
            while True:
                line = await session.queue.get()
                await ws.send_text(line)

        sender_task = asyncio.ensure_future(sender())
        try:
            while True:
                text = await ws.receive_text()
                if text.strip():
                    await service.submit(session, text)
        except WebSocketDisconnect:
            pass
        finally:
            sender_task.cancel()
            service.close_session(session)

    return app


async def _serve(kernel: Debugger, listen_port: Optional[int],
                 http_port: Optional[int], host: str):
    service = DebugService(kernel)
    tasks = [service.ensure_executor()]
    tcp_server = None
    if listen_port is not None:
        tcp_server = await asyncio.start_server(service.handle_tcp, host, listen_port)
    http_server = None
    if http_port is not None:
        import uvicorn

        config = uvicorn.Config(create_app(service), host=host, port=http_port,
                                log_level="error")
        http_server = uvicorn.Server(config)
        tasks.append(asyncio.ensure_future(http_server.serve()))

    await service.shutdown_event.wait()
    if tcp_server is not None:
        tcp_server.close()
        await tcp_server.wait_closed()
    if http_server is not None:
        http_server.should_exit = True
    for t in tasks:
        t.cancel()
    await asyncio.gather(*tasks, return_exceptions=True)


def serve(kernel: Debugger, listen_port: Optional[int] = None,
          http_port: Optional[int] = None, host: str = "127.0.0.1"):
    """Run the service until a shutdown request arrives."""
    if listen_port is None and http_port is None:
        raise ValueError("serve needs a TCP port, an HTTP port, or both")
    asyncio.run(_serve(kernel, listen_port, http_port, host))