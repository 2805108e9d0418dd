"""Discrete Butterworth low-pass filters used for network inputs and PD feedback."""

from __future__ import annotations

import math


class LowPassFilter:
    """Butterworth low-pass: first-order section plus biquad cascade.

    Coefficients come from the bilinear transform with prewarping at the cutoff,
    so the -3 dB point lands exactly on `cutoff_hz` and the DC gain is 1 by
    construction.  Odd orders lead with a single real-pole section; even orders
    are pure biquad cascades.
    """

    def __init__(self, cutoff_hz: float, sample_hz: float, order: int = 2):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not 0.0 < cutoff_hz < sample_hz / 2.0:
            raise ValueError(
                f"cutoff {cutoff_hz} Hz must lie in (0, Nyquist={sample_hz / 2.0} Hz)")
        self.cutoff_hz = cutoff_hz
        self.sample_hz = sample_hz
        self.order = order

        a = math.tan(math.pi * cutoff_hz / sample_hz)  # prewarped analog cutoff
        a2 = a * a

        # Optional first-order section (odd orders): pole on the real axis.
        self._fo = None
        if order % 2 == 1:
            self._fo = {"g": a / (1.0 + a), "d": (1.0 - a) / (1.0 + a), "w": 0.0}

        n = order // 2
        self._gain = []
        self._d1 = []
        self._d2 = []
        for i in range(n):
            r = math.sin(math.pi * (2.0 * i + 1.0) / (4.0 * n))  # pole-pair damping
            s = a2 + 2.0 * a * r + 1.0
            self._gain.append(a2 / s)
            self._d1.append(2.0 * (1.0 - a2) / s)
            self._d2.append(-(a2 - 2.0 * a * r + 1.0) / s)
        self._w1 = [0.0] * n
        self._w2 = [0.0] * n
        self._primed = False

    def reset(self):
        """Clear the delay lines; the next sample primes them again."""
        self._w1 = [0.0] * len(self._w1)
        self._w2 = [0.0] * len(self._w2)
        if self._fo is not None:
            self._fo["w"] = 0.0
        self._primed = False

    def prime(self, sample: float):
        """Load the steady-state response for `sample` to kill the startup transient."""
        if self._fo is not None:
            self._fo["w"] = sample / (1.0 - self._fo["d"])
        for i in range(len(self._w1)):
            w = sample / (1.0 - self._d1[i] - self._d2[i])
            self._w1[i] = w
            self._w2[i] = w
        self._primed = True

    def step(self, sample: float) -> float:
        """Advance the recursion by one sample and return the filtered value."""
        if not self._primed:
            self.prime(sample)
        x = sample
        if self._fo is not None:
            w0 = self._fo["d"] * self._fo["w"] + x
            x = self._fo["g"] * (w0 + self._fo["w"])
            self._fo["w"] = w0
        for i in range(len(self._w1)):
            w0 = self._d1[i] * self._w1[i] + self._d2[i] * self._w2[i] + x
            x = self._gain[i] * (w0 + 2.0 * self._w1[i] + self._w2[i])
            self._w2[i] = self._w1[i]
            self._w1[i] = w0
        return x

    def magnitude_at(self, freq_hz: float) -> float:
        """Analytic magnitude response of the discretized filter at `freq_hz`."""
        z = complex(math.cos(2.0 * math.pi * freq_hz / self.sample_hz),
                    math.sin(2.0 * math.pi * freq_hz / self.sample_hz))
        h = complex(1.0, 0.0)
        if self._fo is not None:
            h *= self._fo["g"] * (1.0 + 1.0 / z) / (1.0 - self._fo["d"] / z)
        for g, d1, d2 in zip(self._gain, self._d1, self._d2):
            h *= g * (1.0 + 2.0 / z + 1.0 / z**2) / (1.0 - d1 / z - d2 / z**2)
        return abs(h)


class FilterBank:
    """One independent LowPassFilter per channel, stepped as a vector."""

    def __init__(self, n_channels: int, cutoff_hz: float, sample_hz: float,
                 order: int = 2):
        self.filters = [LowPassFilter(cutoff_hz, sample_hz, order)
                        for _ in range(n_channels)]

    def __len__(self):
        return len(self.filters)

    def reset(self):
        for f in self.filters:
            f.reset()

    def step(self, samples):
        if len(samples) != len(self.filters):
            raise ValueError(
                f"expected {len(self.filters)} samples, got {len(samples)}")
        return [f.step(x) for f, x in zip(self.filters, samples)]
