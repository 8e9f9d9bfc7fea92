"""Timestamp sources. The logical clock makes mock-provider runs byte-stable:
each tick advances one second from a fixed epoch."""

from __future__ import annotations

import datetime


class SystemTimeClock:
    def timestamp(self) -> str:
        return (
            datetime.datetime.now(datetime.timezone.utc)
            .replace(microsecond=0)
            .isoformat()
        )


class LogicalClock:
    def __init__(self, start: str = "2024-01-01T00:00:00+00:00"):
        self._current = datetime.datetime.fromisoformat(start)

    def timestamp(self) -> str:
        value = self._current.isoformat()
        self._current += datetime.timedelta(seconds=1)
        return value
