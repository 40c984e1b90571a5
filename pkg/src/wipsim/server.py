"""Live teleoperation server.

Exactly one simulation thread owns the World and paces it against the
wall clock at the configured tick rate. Network I/O runs in per-client
threads and talks to the sim thread only through queues: an inbound
queue of (client, message) pairs drained at tick boundaries, and one
bounded outbound deque per client that drops oldest telemetry on
overflow (telemetry is lossy by contract; run logs are not). The first
connected client is the pilot; everyone else observes.
"""

from __future__ import annotations

import itertools
import pathlib
import queue
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass

from .config import load_gains_pairs, load_mapping_pairs
from .control import FLAG_NAMES
from .course import TERMINAL
from .errors import ConfigError, ProtocolError
from .mapping import MappingConfig, PilotInput
from .runlog import RunRecord, course_path_length, write_log
from .wire import PROTOCOL_VERSION, WsConnection, decode_message, encode_message, ws_accept
from .world import Frame, World

__all__ = ["ServerConfig", "TeleopServer"]

_INBOUND_LIMIT = 4096
_OUTBOUND_LIMIT = 256


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    transport: str = "stream"  # stream (WebSocket) | datagram (UDP)
    telemetry_hz: float = 60.0
    log_dir: str | None = None
    realtime: bool = True  # tests may run the loop flat out


class _Client:
    _ids = itertools.count(1)

    def __init__(self, conn: WsConnection, addr):
        self.id = next(self._ids)
        self.conn = conn
        self.addr = addr
        self.outbound: deque[str] = deque(maxlen=_OUTBOUND_LIMIT)
        self.wakeup = threading.Condition()
        self.alive = True

    def push(self, text: str) -> None:
        self.outbound.append(text)  # deque drops oldest on overflow
        with self.wakeup:
            self.wakeup.notify()


class TeleopServer:
    def __init__(self, world: World, config: ServerConfig = ServerConfig()):
        self.world = world
        self.config = config
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._pilot_id: int | None = None
        self._inbound: queue.Queue = queue.Queue(maxsize=_INBOUND_LIMIT)
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._listener: socket.socket | None = None
        self._udp: socket.socket | None = None
        self.port: int | None = None
        self.frames: list[Frame] = []
        self._run_logged = False
        self._udp_peer = None
        self._telemetry_div = max(1, round(world.options.rate_hz / config.telemetry_hz))

    # -- lifecycle --------------------------------------------------------

    def start(self) -> None:
        """Bind and launch the accept + sim threads. Raises OSError if the
        port is unavailable."""
        if self.config.transport == "stream":
            listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            listener.bind((self.config.host, self.config.port))
            listener.listen(8)
            self._listener = listener
            self.port = listener.getsockname()[1]
            self._spawn(self._accept_loop, "accept")
        elif self.config.transport == "datagram":
            udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            udp.bind((self.config.host, self.config.port))
            self._udp = udp
            self.port = udp.getsockname()[1]
            self._spawn(self._udp_loop, "udp")
        else:
            raise ConfigError(f"unknown transport {self.config.transport!r}")
        self._spawn(self._sim_loop, "sim")

    def stop(self) -> None:
        with self._clients_lock:
            waiting = list(self._clients)
        deadline = time.time() + 1.0
        while time.time() < deadline and any(c.outbound for c in waiting):
            time.sleep(0.02)
        self._stop.set()
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        if self._udp is not None:
            try:
                self._udp.close()
            except OSError:
                pass
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            client.alive = False
            with client.wakeup:
                client.wakeup.notify()
            try:
                client.conn.close()
            except OSError:
                pass
        for thread in self._threads:
            thread.join(timeout=3.0)

    def run_forever(self) -> None:
        self.start()
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    def _spawn(self, target, name: str) -> None:
        thread = threading.Thread(target=target, name=f"wipsim-{name}", daemon=True)
        thread.start()
        self._threads.append(thread)

    # -- network side -----------------------------------------------------

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            try:
                conn = ws_accept(sock)
            except (ProtocolError, OSError):
                sock.close()
                continue
            client = _Client(conn, addr)
            with self._clients_lock:
                self._clients.append(client)
                if self._pilot_id is None:
                    self._pilot_id = client.id
            self._spawn(lambda c=client: self._reader_loop(c), f"read-{client.id}")
            self._spawn(lambda c=client: self._writer_loop(c), f"write-{client.id}")

    def _reader_loop(self, client: _Client) -> None:
        while not self._stop.is_set() and client.alive:
            text = client.conn.recv_text()
            if text is None:
                break
            try:
                msg = decode_message(text)
            except ProtocolError as exc:
                client.push(encode_message(_event("protocol_error", str(exc))))
                continue  # connection preserved
            try:
                self._inbound.put((client, msg), timeout=1.0)
            except queue.Full:
                client.push(encode_message(_event("input_overflow", "inbound queue full")))
        self._drop_client(client)

    def _writer_loop(self, client: _Client) -> None:
        while client.alive and not self._stop.is_set():
            with client.wakeup:
                while not client.outbound and client.alive and not self._stop.is_set():
                    client.wakeup.wait(timeout=0.5)
            while True:
                try:
                    text = client.outbound.popleft()
                except IndexError:
                    break
                try:
                    client.conn.send_text(text)
                except OSError:
                    client.alive = False
                    break
        self._drop_client(client)

    def _drop_client(self, client: _Client) -> None:
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)
                if self._pilot_id == client.id:
                    self._pilot_id = None  # next new connection becomes pilot
        client.alive = False
        with client.wakeup:
            client.wakeup.notify()

    def _udp_loop(self) -> None:
        assert self._udp is not None
        pilot_addr = None
        while not self._stop.is_set():
            try:
                data, addr = self._udp.recvfrom(65536)
            except OSError:
                return
            if pilot_addr is None:
                pilot_addr = addr
                self._udp_peer = addr
            try:
                msg = decode_message(data.decode("utf-8", errors="replace"))
            except ProtocolError as exc:
                self._udp.sendto(encode_message(_event("protocol_error", str(exc))).encode(), addr)
                continue
            client = _Client.__new__(_Client)
            client.id = -1 if addr != pilot_addr else 0
            client.addr = addr
            self._inbound.put((client, msg))

    # -- simulation side ---------------------------------------------------

    def _broadcast(self, text: str) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            client.push(text)
        if self._udp is not None and self._udp_peer is not None:
            try:
                self._udp.sendto(text.encode(), self._udp_peer)
            except OSError:
                pass

    def _send_to(self, client: _Client, text: str) -> None:
        if self._udp is not None:
            try:
                self._udp.sendto(text.encode(), client.addr)
            except OSError:
                pass
        else:
            client.push(text)

    def _is_pilot(self, client: _Client) -> bool:
        if self._udp is not None:
            return client.id == 0
        return client.id == self._pilot_id

    def _sim_loop(self) -> None:
        world = self.world
        dt = world.dt
        next_tick = time.perf_counter()
        while not self._stop.is_set():
            # apply inbound messages at the tick boundary
            while True:
                try:
                    client, msg = self._inbound.get_nowait()
                except queue.Empty:
                    break
                self._handle_message(client, msg)

            frame = world.tick(None)
            if self.config.log_dir is not None and world.judge is not None:
                self.frames.append(frame)

            for event in world.drain_events():
                self._broadcast(encode_message(_event(event["name"],
                                                      str(event.get("detail", "")),
                                                      t=event.get("t"))))
            if world.tick_count % self._telemetry_div == 0:
                self._broadcast(encode_message(_state_message(world, frame)))

            if world.judge is not None and world.judge.status in TERMINAL \
                    and not self._run_logged:
                # the session stays live after the verdict (the judge holds
                # its terminal state); persist the run record exactly once
                self._broadcast(encode_message(_state_message(world, frame)))
                self._finish_log()
                self._run_logged = True

            if self.config.realtime:
                next_tick += dt
                delay = next_tick - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
                elif delay < -0.25:
                    next_tick = time.perf_counter()  # fell badly behind; resync
        self._stop.set()

    def _handle_message(self, client: _Client, msg: dict) -> None:
        mtype = msg["type"]
        if mtype == "input":
            if not self._is_pilot(client):
                return
            accepted = self.world.offer_input(PilotInput(
                p_x=float(msg["p_x"]), gamma_h=float(msg["gamma_h"]),
                t=float(msg["t"]), seq=int(msg["seq"])))
            if not accepted:
                self._send_to(client, encode_message({
                    "type": "ack", "v": PROTOCOL_VERSION, "ok": False,
                    "seq": int(msg["seq"]), "reason": "stale sequence number",
                    "last_input_seq": self.world.last_seq}))
        elif mtype == "config":
            self._apply_config(client, msg)
        # state/event/ack from clients are ignored

    def _apply_config(self, client: _Client, msg: dict) -> None:
        seq = int(msg.get("seq", 0))
        try:
            if "mapping" in msg:
                pairs = [(str(k), str(v)) for k, v in dict(msg["mapping"]).items()]
                self.world.apply_mapping(load_mapping_pairs(pairs, base=self.world.mapping_cfg))
            if "gains" in msg:
                pairs = [(str(k), str(v)) for k, v in dict(msg["gains"]).items()]
                self.world.apply_gains(load_gains_pairs(pairs))
        except (ConfigError, ValueError) as exc:
            self._send_to(client, encode_message({
                "type": "ack", "v": PROTOCOL_VERSION, "ok": False, "seq": seq,
                "reason": str(exc), "last_input_seq": self.world.last_seq}))
            return
        self._send_to(client, encode_message({
            "type": "ack", "v": PROTOCOL_VERSION, "ok": True, "seq": seq,
            "reason": "", "last_input_seq": self.world.last_seq,
            "mapping": _mapping_dict(self.world.mapping_cfg)}))

    def _finish_log(self) -> None:
        if self.config.log_dir is None:
            return
        world = self.world
        record = RunRecord(
            params=world.params, gains=world.gains, mapping=world.mapping_cfg,
            options=world.options, course=world.course, frames=self.frames,
            verdict=world.judge.verdict if world.judge else None,
            completion_time=world.judge.completion_time if world.judge else None,
            gains_changed=world.gains_changed,
        )
        record.path_length = course_path_length(
            self.frames, world.course, world.judge.t_cross if world.judge else None)
        directory = pathlib.Path(self.config.log_dir)
        directory.mkdir(parents=True, exist_ok=True)
        write_log(record, directory / f"serve_{int(time.time())}.log")


def _event(name: str, detail: str = "", t: float | None = None) -> dict:
    msg = {"type": "event", "v": PROTOCOL_VERSION, "name": name, "detail": detail}
    if t is not None:
        msg["t"] = t
    return msg


def _mapping_dict(cfg: MappingConfig) -> dict:
    out = {"mode": cfg.mode, "theta_H_max": cfg.theta_H_max, "k_spring": cfg.k_spring,
           "accel_filter_cutoff_hz": cfg.accel_filter_cutoff_hz}
    for section, obj, keys in (("vel", cfg.vel, ("deadband", "swp", "max_in", "alpha1", "alpha2")),
                               ("yaw", cfg.yaw, ("deadband", "swp", "max_in", "alpha1", "alpha2")),
                               ("acc", cfg.acc, ("deadband", "slope", "max_tilt"))):
        for key in keys:
            out[f"{section}.{key}"] = getattr(obj, key)
    return out


def _state_message(world: World, frame: Frame) -> dict:
    s = frame.state
    d = frame.desired
    judge = world.judge
    run: dict = {"status": judge.status if judge else "freerun"}
    if judge is not None:
        run["clock"] = max(0.0, s.t - judge.course.countdown)
        run["countdown_left"] = max(0.0, judge.course.countdown - s.t)
        if judge.completion_time is not None:
            run["completion_time"] = judge.completion_time
        if judge.verdict is not None:
            run["verdict"] = judge.verdict
        if judge.hit_cone is not None:
            run["hit_cone"] = judge.hit_cone
    return {
        "type": "state", "v": PROTOCOL_VERSION, "seq": frame.tick, "t": s.t,
        "pose": {"x": s.x_world, "y": s.y_w, "gamma": s.gamma},
        "pitch": s.theta_R, "pitch_rate": s.thetadot_R,
        "xdot": s.xdot_w, "x_w": s.x_w,
        "desired": {"x": d.x_des, "xdot": d.xdot_des, "pitch": d.theta_R_des,
                    "gamma": d.gamma_des, "gammadot": d.gammadot_des},
        "spring": frame.spring_force,
        "odometry": {"x": frame.odometry[0], "y": frame.odometry[1],
                     "gamma": frame.odometry[2]},
        "flags": [name for bit, name in FLAG_NAMES.items() if frame.flags & bit],
        "run": run,
        "mode": world.mapping_cfg.mode,
    }
