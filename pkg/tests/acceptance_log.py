"""PASS/FAIL lines collected by test_acceptance.py and printed after the run."""
import contextlib
import time

RESULTS: dict[int, str] = {}


@contextlib.contextmanager
def criterion(n: int, title: str):
    """Record PASS or FAIL for criterion ``n``; the test still fails normally."""
    notes: list[str] = []
    start = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        line = f"criterion {n}: FAIL  {title} ({type(exc).__name__}: {exc})"
        RESULTS[n] = line.splitlines()[0]
        print(RESULTS[n])
        raise
    elapsed = time.perf_counter() - start
    detail = "; ".join(notes)
    RESULTS[n] = f"criterion {n}: PASS  {title} [{elapsed:.2f} s]" + (f"  {detail}" if detail else "")
    print(RESULTS[n])
