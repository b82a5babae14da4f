"""Post-commit confirmation notifications.

A notification is created only after its response is durably stored, and
delivery runs on a background worker with a bounded queue, so the mail
path can never delay or fail a submission that already committed. The
repo ships two transports: capture (records messages in memory, used by
tests) and gateway (forwards the message as JSON to a single external
endpoint); real mail delivery is the gateway's problem.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, field

import httpx

log = logging.getLogger("statboard.notify")

PENDING = "pending"
SENT = "sent"
FAILED = "failed"


@dataclass
class Notification:
    recipient: str
    questionnaire_title: str
    submitted_at: str
    state: str = PENDING

    def message(self) -> dict:
        return {
            "to": self.recipient,
            "subject": f"Responses stored: {self.questionnaire_title}",
            "body": (
                f"Thank you. Your responses to \"{self.questionnaire_title}\" "
                f"were stored successfully at {self.submitted_at}."
            ),
        }


class CaptureTransport:
    """Records every message in memory; inspected by tests."""

    def __init__(self):
        self._lock = threading.Lock()
        self.messages: list[dict] = []

    def send(self, notification: Notification):
        with self._lock:
            self.messages.append(notification.message())


class GatewayTransport:
    """Forwards messages to one external HTTP endpoint as JSON."""

    def __init__(self, endpoint: str, timeout: float = 5.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def send(self, notification: Notification):
        response = httpx.post(self.endpoint, json=notification.message(), timeout=self.timeout)
        response.raise_for_status()


@dataclass
class NotifierStats:
    enqueued: int = 0
    sent: int = 0
    failed: int = 0


class Notifier:
    """Bounded-queue background dispatcher with at-least-one delivery attempt."""

    def __init__(self, transport, *, max_queue: int = 1024, attempts: int = 3,
                 backoff: float = 0.05):
        self.transport = transport
        self.attempts = attempts
        self.backoff = backoff
        self._queue: queue.Queue[Notification] = queue.Queue(maxsize=max_queue)
        self._history: list[Notification] = []
        self._lock = threading.Lock()
        self.stats = NotifierStats()
        self._stop = threading.Event()
        self._worker = threading.Thread(target=self._run, name="statboard-notify", daemon=True)
        self._worker.start()

    def enqueue(self, recipient: str, questionnaire_title: str, submitted_at: str) -> Notification:
        """Queue a confirmation; a full queue marks it failed instead of blocking."""
        n = Notification(recipient=recipient, questionnaire_title=questionnaire_title,
                         submitted_at=submitted_at)
        with self._lock:
            self._history.append(n)
            self.stats.enqueued += 1
        try:
            self._queue.put_nowait(n)
        except queue.Full:
            n.state = FAILED
            with self._lock:
                self.stats.failed += 1
            log.warning("notification queue full; dropped confirmation for %r", recipient)
        return n

    def _deliver(self, n: Notification):
        for attempt in range(self.attempts):
            try:
                self.transport.send(n)
                n.state = SENT
                with self._lock:
                    self.stats.sent += 1
                return
            except Exception as exc:
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * (2 ** attempt))
                else:
                    n.state = FAILED
                    with self._lock:
                        self.stats.failed += 1
                    log.error("notification to %r failed after %d attempts: %s",
                              n.recipient, self.attempts, exc)

    def _run(self):
        while not self._stop.is_set():
            try:
                n = self._queue.get(timeout=0.1)
            except queue.Empty:
                continue
            self._deliver(n)
            self._queue.task_done()

    def drain(self, timeout: float = 10.0):
        """Block until every queued notification was attempted (for tests)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._lock:
                done = self.stats.sent + self.stats.failed >= self.stats.enqueued
            if done and self._queue.empty():
                return
            time.sleep(0.01)
        raise TimeoutError("notifier did not drain in time")

    def history(self) -> list[Notification]:
        with self._lock:
            return list(self._history)

    def close(self):
        self._stop.set()
        self._worker.join(timeout=2.0)
