from typing import Protocol, runtime_checkable


@runtime_checkable
class ProgressCallback(Protocol):
    """Protocol for progress reporting callbacks.

    Simulation work is reported in three nested levels:

    * **Phase**: the job being run (e.g., 'Episode proposed/seed 7').
    * **Step**: a stage of that job (e.g., 'Simulate blocks').
    * **Message**: a counter inside the stage (e.g., 'Block 120/2000',
      'Cell 3/18').

    ```python
    def callback(
        phase: str | None = None,
        step_name: str | None = None,
        step_number: int = 0,
        total_steps: int = 0,
        message: str = "",
        progress: float = 0.0,
    ) -> None: ...
    ```

    A `None` phase or step name keeps the previous value. `progress` is the
    completed fraction of the current step.
    """

    def __call__(
        self,
        phase: str | None = None,
        step_name: str | None = None,
        step_number: int = 0,
        total_steps: int = 0,
        message: str = "",
        progress: float = 0.0,
    ) -> None: ...


def silent_callback(
    phase: str | None = None,
    step_name: str | None = None,
    step_number: int = 0,
    total_steps: int = 0,
    message: str = "",
    progress: float = 0.0,
) -> None:
    """Default callback for library calls; discards every update."""
    pass


class ProgressTracker:
    """Keeps phase/step bookkeeping and forwards updates to a callback.

    Args:
        callback: Receiver of the updates; `None` selects `silent_callback`.
        phase: Phase name, announced once on construction.
        total_steps: Number of steps the phase will go through.
        report_every: Emit a counter message only every this many ticks
            (the last tick is always emitted).
    """

    def __init__(
        self,
        callback: ProgressCallback | None,
        phase: str,
        total_steps: int = 1,
        report_every: int = 1,
    ) -> None:
        self.callback = callback if callback is not None else silent_callback
        self.phase = phase
        self.total_steps = max(1, total_steps)
        self.report_every = max(1, report_every)
        self.current_step = 0
        self.callback(phase=phase)

    def update(
        self,
        step: int | None = None,
        step_name: str = "",
        message: str = "",
        progress: float | None = None,
    ) -> None:
        """Move to a new step (or the next one when `step` is None)."""
        if step is not None:
            self.current_step = step
        else:
            self.current_step += 1

        progress = 0.0 if progress is None else max(0.0, min(1.0, progress))

        self.callback(
            step_name=step_name if step_name else None,
            step_number=self.current_step,
            total_steps=self.total_steps,
            progress=progress,
            message=message,
        )

    def tick(self, count: int, total: int, unit: str = "Block") -> None:
        """Report `count` of `total` units done inside the current step."""
        if count % self.report_every != 0 and count != total:
            return
        self.callback(
            step_number=self.current_step,
            total_steps=self.total_steps,
            progress=count / max(1, total),
            message=f"{unit} {count}/{total}",
        )
