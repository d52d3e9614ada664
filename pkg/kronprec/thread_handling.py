import sys
import threading


class ThreadHandler(object):
    """
    Run ``callable(*args, **kwargs)`` on a daemon thread.

    The return value lands in ``result``; an exception is captured as
    ``sys.exc_info()`` in ``exception`` instead of being printed by the
    threading machinery, so the caller can decide how to report it.
    """

    def __init__(self, name, callable, *args, **kwargs):
        self.name = name
        self.result = None
        self.exception = None
        def wrapper(*args, **kwargs):
            try:
                self.result = callable(*args, **kwargs)
            except BaseException:
                self.exception = sys.exc_info()
        thread = threading.Thread(None, wrapper, name, args, kwargs)
        thread.daemon = True
        thread.start()
        self.thread = thread

    def join(self, timeout=None):
        self.thread.join(timeout)
        return self

    @property
    def failed(self):
        return self.exception is not None

    def raise_if_failed(self):
        if self.exception is not None:
            raise self.exception[1].with_traceback(self.exception[2])


def run_in_threads(jobs, workers):
    """
    Run ``(name, callable, args)`` jobs at most ``workers`` at a time.

    Returns the finished handlers in job order, regardless of which finished
    first.
    """
    handlers = []
    pending = list(jobs)
    while pending:
        batch, pending = pending[:max(1, workers)], pending[max(1, workers):]
        started = [ThreadHandler(name, func, *args) for name, func, args in batch]
        for handler in started:
            handler.join()
        handlers.extend(started)
    return handlers
