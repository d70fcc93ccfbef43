from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Decoded waveform.

    ``samples`` is 1-D for mono audio and ``(frames, channels)`` before mixdown.
    ``channel_count`` always records the channel count of the source file.
    """

    samples: np.ndarray
    sample_rate: int
    channel_count: int = 1

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim not in (1, 2):
            raise ValueError(f"samples must be 1-D or 2-D, got {self.samples.ndim}-D")
        self.samples.setflags(write=False)

    @property
    def is_mono(self) -> bool:
        return self.samples.ndim == 1

    @property
    def n_frames(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return self.n_frames / self.sample_rate

    def __repr__(self) -> str:
        layout = "mono" if self.is_mono else f"{self.samples.shape[1]}ch"
        return f"<AudioBuffer {self.n_frames} frames @ {self.sample_rate} Hz ({layout})>"
