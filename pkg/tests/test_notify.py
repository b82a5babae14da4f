import pytest

from statboard.notify import FAILED, SENT, CaptureTransport, Notifier


class FlakyTransport:
    """Fails a fixed number of times, then delivers."""

    def __init__(self, failures):
        self.failures = failures
        self.sent = []

    def send(self, notification):
        if self.failures > 0:
            self.failures -= 1
            raise ConnectionError("transport down")
        self.sent.append(notification.message())


class DeadTransport:
    def send(self, notification):
        raise ConnectionError("transport down")


def test_capture_records_one_message_per_submit():
    transport = CaptureTransport()
    notifier = Notifier(transport)
    n = notifier.enqueue("alice@example", "Event evaluation", "2026-08-10T00:00:00Z")
    notifier.drain()
    assert n.state == SENT
    assert len(transport.messages) == 1
    assert "Event evaluation" in transport.messages[0]["subject"]
    notifier.close()


def test_retry_then_success():
    transport = FlakyTransport(failures=2)
    notifier = Notifier(transport, attempts=3, backoff=0.001)
    n = notifier.enqueue("bob", "T", "ts")
    notifier.drain()
    assert n.state == SENT
    assert len(transport.sent) == 1
    notifier.close()


def test_outage_marks_failed_without_raising():
    notifier = Notifier(DeadTransport(), attempts=2, backoff=0.001)
    n = notifier.enqueue("carol", "T", "ts")
    notifier.drain()
    assert n.state == FAILED
    assert notifier.stats.failed == 1
    notifier.close()


def test_order_matches_enqueue_order():
    transport = CaptureTransport()
    notifier = Notifier(transport)
    for i in range(20):
        notifier.enqueue(f"user{i}", "T", f"ts{i}")
    notifier.drain()
    assert [m["to"] for m in transport.messages] == [f"user{i}" for i in range(20)]
    notifier.close()


def test_full_queue_fails_fast_instead_of_blocking():
    notifier = Notifier(DeadTransport(), max_queue=1, attempts=1, backoff=5.0)
    # worker is busy brief moments; overfill aggressively
    results = [notifier.enqueue(f"u{i}", "T", "ts") for i in range(50)]
    assert any(n.state == FAILED for n in results)  # queue-full drops marked failed
    notifier.close()
