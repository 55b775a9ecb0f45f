"""Command-line entry points: interactive REPL, batch script runner, service.

Exit codes: 0 clean, 1 uncaught script error, 2 unreadable script file.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

from .errors import ScriptError
from .interp import ExitScript, list_format
from .kernel import Debugger

PROMPT = "luxdbg: "


def _stdout_write(text: str):
    sys.stdout.write(text)
    sys.stdout.flush()


def run_script(kernel: Debugger, path: str, args: list) -> int:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"Error: cannot read script {path!r}: {e.strerror}", file=sys.stderr)
        return 2
    kernel.interp.set_var("argv0", path)
    kernel.interp.set_var("argv", list_format(args))
    kernel.interp.set_var("argc", str(len(args)))
    try:
        kernel.eval_command(text)
    except ExitScript as e:
        sys.stdout.flush()
        return e.code
    except ScriptError as e:
        sys.stdout.flush()
        print(f"Error: {e.message}", file=sys.stderr)
        return 1
    sys.stdout.flush()
    return 0


def _incomplete(message: str) -> bool:
    return "missing close" in message


def repl(kernel: Debugger, batch: bool = False) -> int:
    """Read-eval-print against the in-process kernel. Ctrl-D exits cleanly."""
    pending = ""
    while True:
        if not batch and not pending:
            _stdout_write(PROMPT)
        line = sys.stdin.readline()
        if line == "":
            return 0
        text = pending + line
        if not text.strip():
            pending = ""
            continue
        try:
            result = kernel.eval_command(text)
        except ExitScript as e:
            return e.code
        except ScriptError as e:
            if _incomplete(e.message):
                pending = text  # keep reading a multi-line construct
                continue
            pending = ""
            print(f"Error: {e.message}")
            continue
        pending = ""
        if result:
            print(result)


def connect_client(target: str, batch: bool = False) -> int:
    """Thin-client REPL: forward lines to a served kernel over the wire protocol."""
    host, _, port_text = target.rpartition(":")
    if not host:
        host = "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        print(f"Error: bad --connect target {target!r}", file=sys.stderr)
        return 2
    sock = socket.create_connection((host, port))
    rfile = sock.makefile("r", encoding="utf-8")
    seq = 0
    try:
        while True:
            if not batch:
                _stdout_write(PROMPT)
            line = sys.stdin.readline()
            if line == "":
                return 0
            if not line.strip():
                continue
            seq += 1
            sock.sendall((json.dumps({"id": seq, "op": "eval", "cmd": line.strip()})
                          + "\n").encode("utf-8"))
            while True:
                reply = rfile.readline()
                if reply == "":
                    print("Error: connection closed", file=sys.stderr)
                    return 1
                msg = json.loads(reply)
                if "event" in msg:
                    if msg["event"] == "output":
                        _stdout_write(msg.get("text", ""))
                    else:
                        print(f"[{msg['event']}] {json.dumps(msg)}")
                    continue
                if msg.get("ok"):
                    if msg.get("result"):
                        print(msg["result"])
                else:
                    print(f"Error: {msg.get('error')}")
                break
    finally:
        sock.close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="luxdbg",
        description="Scriptable multi-processor embedded-system debugger.")
    parser.add_argument("--script", metavar="FILE",
                        help="run an extension-language script and exit")
    parser.add_argument("script_args", nargs="*", metavar="ARG",
                        help="arguments handed to the script as $argv")
    parser.add_argument("--listen", type=int, metavar="PORT",
                        help="serve newline-delimited JSON over TCP")
    parser.add_argument("--http", type=int, metavar="PORT",
                        help="serve the HTTP/WebSocket front (browser clients)")
    parser.add_argument("--host", default="127.0.0.1",
                        help="bind address for --listen/--http")
    parser.add_argument("--log", metavar="FILE", help="append the kernel event log here")
    parser.add_argument("--batch", action="store_true",
                        help="read commands from stdin without a prompt")
    parser.add_argument("--connect", metavar="HOST:PORT",
                        help="act as a thin client of a served kernel")
    args = parser.parse_args(argv)

    if args.connect:
        return connect_client(args.connect, batch=args.batch)

    log_sink = None
    if args.log:
        log_sink = open(args.log, "w", encoding="utf-8")
    kernel = Debugger(stdout_write=_stdout_write, log_sink=log_sink)
    try:
        if args.script:
            return run_script(kernel, args.script, args.script_args)
        if args.listen is not None or args.http is not None:
            from .service import serve

            serve(kernel, listen_port=args.listen, http_port=args.http, host=args.host)
            return 0
        return repl(kernel, batch=args.batch)
    finally:
        if log_sink is not None:
            log_sink.close()


if __name__ == "__main__":
    sys.exit(main())