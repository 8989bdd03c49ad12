"""
Gateway service: newline-delimited JSON frames in, alert lines out.

One ingest task windows the incoming frames and one classify task runs
the detector. They share a bounded queue. A live socket source cannot be
paused, so when the queue is full the oldest waiting window is discarded
and counted. Stdin is a replay that can wait, so its ingest blocks on the
queue instead and every window is classified. Frames are never discarded
for backpressure.
"""

import asyncio
import logging
import sys
from typing import List, Optional, TextIO, Tuple

from .detector import FallDetector
from .windowing import StreamCounters, StreamFrame, Window, Windower

_STOP = object()


def parse_address(address: str) -> Tuple[str, int]:
    """Split 'host:port' (host optional) into its parts."""
    host, _, port = address.rpartition(":")
    try:
        return host or "127.0.0.1", int(port)
    except ValueError:
        raise ValueError(f"Invalid address '{address}', expected host:port")


class GatewayService:
    """Runs a FallDetector over stdin or a TCP line stream."""

    def __init__(self, detector: FallDetector, listen: str = "-",
                 alert_address: Optional[str] = None, queue_size: int = 8,
                 out: Optional[TextIO] = None, source: Optional[TextIO] = None):
        self.logger = logging.getLogger(__name__)
        self.detector = detector
        self.counters: StreamCounters = detector.counters
        self.listen = listen
        self.alert_address = alert_address
        self.out = out or sys.stdout
        self.source = source or sys.stdin
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=max(1, int(queue_size)))
        self._subscribers: List[asyncio.StreamWriter] = []

    def _enqueue(self, window: Window):
        """Queue a window from a live source, discarding the oldest when full."""
        if self.queue.full():
            dropped = self.queue.get_nowait()
            self.counters.windows_dropped += 1
            self.logger.warning(f"Classifier behind, dropped window {dropped.index}")
        self.queue.put_nowait(window)

    def _ingest_line(self, windower: Windower, line: str) -> Optional[Window]:
        line = line.strip()
        if not line:
            return None
        try:
            frame = StreamFrame.from_json(line)
        except ValueError as e:
            self.counters.frames_in += 1
            self.counters.frames_dropped += 1
            self.logger.warning(f"Dropped malformed frame: {e}")
            return None
        return windower.push(frame)

    def _new_windower(self) -> Windower:
        return Windower(self.detector.policy, self.detector.fs, self.counters)

    async def _ingest_stdin(self):
        windower = self._new_windower()
        while True:
            line = await asyncio.to_thread(self.source.readline)
            if not line:
                break
            window = self._ingest_line(windower, line)
            if window is not None:
                await self.queue.put(window)
        self.logger.info("Input stream closed")

    async def _handle_stream(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        peer = writer.get_extra_info("peername")
        self.logger.info(f"Frame source connected: {peer}")
        windower = self._new_windower()
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                window = self._ingest_line(windower, line.decode("utf-8", errors="replace"))
                if window is not None:
                    self._enqueue(window)
        finally:
            writer.close()
            self.logger.info(f"Frame source disconnected: {peer}")

    async def _ingest_socket(self):
        host, port = parse_address(self.listen)
        server = await asyncio.start_server(self._handle_stream, host, port)
        self.logger.info(f"Listening for frames on {host}:{port}")
        async with server:
            await server.serve_forever()

    async def _on_subscriber(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self._subscribers.append(writer)
        self.logger.info(f"Alert subscriber connected: {writer.get_extra_info('peername')}")

    async def _broadcast(self, line: str):
        self.out.write(line + "\n")
        self.out.flush()
        for writer in list(self._subscribers):
            try:
                writer.write((line + "\n").encode("utf-8"))
                await writer.drain()
            except (ConnectionError, OSError):
                self._subscribers.remove(writer)

    async def _classify_loop(self):
        while True:
            item = await self.queue.get()
            if item is _STOP:
                break
            window: Window = item
            result = await asyncio.to_thread(self.detector.process, window)
            if result.alert is not None:
                await self._broadcast(result.alert.to_json())

    async def run(self) -> StreamCounters:
        """Serve until the input ends (stdin) or the task is cancelled (socket)."""
        alert_server = None
        if self.alert_address:
            host, port = parse_address(self.alert_address)
            alert_server = await asyncio.start_server(self._on_subscriber, host, port)
            self.logger.info(f"Publishing alerts on {host}:{port}")

        classifier = asyncio.create_task(self._classify_loop())
        try:
            if self.listen == "-":
                await self._ingest_stdin()
            else:
                await self._ingest_socket()
            # the sentinel waits for room; it never displaces a window
            await self.queue.put(_STOP)
            await classifier
        finally:
            if not classifier.done():
                classifier.cancel()
            if alert_server is not None:
                alert_server.close()
            for writer in self._subscribers:
                writer.close()
            self.logger.info(f"Gateway counters: {self.counters.to_dict()}")
        return self.counters
