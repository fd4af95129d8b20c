from dataclasses import dataclass
from inspect import signature
import threading
from typing import Callable, Type

from common.custom_logging import get_general_logger


@dataclass
class _Observer:
    callback: Callable
    priority: int
    every: int  # called on every n-th trigger only
    triggers_seen: int = 0


class Signal:
    """
    Typed signal with checked payloads and callback signatures; "object" accepts any type.

        replica_finished = Signal(int, int)
        replica_finished.add(log_progress, every=100)
        replica_finished.trigger(3, 10)

    Ensemble workers trigger it from several threads. trigger() holds a lock, so observers
    never run concurrently and the per-observer trigger count stays exact.
    """

    def __init__(self, *arg_types: Type):
        self.arg_types = arg_types
        self._observers: list[_Observer] = []
        self._lock = threading.Lock()

    def add(self, callback: Callable, priority: int = 0, every: int = 1) -> None:
        """
        :param priority: Higher priorities are called first.
        :param every: Call only on every n-th trigger (progress throttling).
        """
        if not callable(callback):
            raise ValueError("callback must be callable")
        if not self._signature_matches(callback):
            raise TypeError(f"Callback {callback} does not match signal signature {self.arg_types}")
        if every < 1:
            raise ValueError(f"every must be >= 1, got {every}")

        with self._lock:
            if any(observer.callback == callback for observer in self._observers):
                get_general_logger().debug(f"{callback} added to a signal twice")
            self._observers.append(_Observer(callback, priority, every))
            self._observers.sort(key=lambda observer: observer.priority, reverse=True)

    def remove(self, callback: Callable) -> None:
        with self._lock:
            self._observers = [observer for observer in self._observers if observer.callback != callback]

    @property
    def observer_count(self) -> int:
        return len(self._observers)

    def trigger(self, *args) -> None:
        if not self._payload_matches(args):
            raise TypeError(f"Invalid payload {args}. Expected types: {self.arg_types}")

        with self._lock:
            for observer in self._observers:
                observer.triggers_seen += 1
                if observer.triggers_seen % observer.every == 0:
                    observer.callback(*args)

    def _payload_matches(self, args: tuple) -> bool:
        return len(args) == len(self.arg_types) and all(
            expected is object or isinstance(arg, expected) for arg, expected in zip(args, self.arg_types)
        )

    def _signature_matches(self, callback: Callable) -> bool:
        parameters = list(signature(callback).parameters.values())
        return len(parameters) == len(self.arg_types) and all(
            expected is object or p.annotation in {expected, p.empty} for p, expected in zip(parameters, self.arg_types)
        )
