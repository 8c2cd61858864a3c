# cutgraph, modular (cut) Bayesian inference on DAG models
# Copyright (C), 2026 cutgraph developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

import sys
import threading
import time


def format_duration(seconds):
    hours, rest = divmod(seconds, 3600)
    minutes, seconds = divmod(rest, 60)
    return f'{hours:02.0f}:{minutes:02.0f}:{seconds:05.2f}'


class ProgressBar:

    def __init__(self, total_iterations, bars=50, bar_items='0123456789#', prefix='', stream=None):
        """
        Text progress bar for experiment loops. Increments are guarded by a lock so worker threads can share one bar.

        Parameters
        ----------
        total_iterations : int
            Number of iterations.
        bars : int, optional
            Length of progress bar (default=50).
        bar_items : str, optional
            Characters used to draw a partially filled cell; the last one marks a completed cell.
        prefix : str, optional
            Label placed before the bar (default='').
        stream : file-like, optional
            Where `print` writes (default sys.stderr).
        """

        if not isinstance(total_iterations, int) or total_iterations < 1:
            raise ValueError(f'<total_iterations> must be a positive integer, {total_iterations!r} was passed')
        if not isinstance(bars, int) or bars < 1:
            raise TypeError(f'value \'{bars}\' is not valid for the <bars> parameter')
        self.total_iterations = total_iterations
        self.bars = bars
        self.bar_items = bar_items
        self.prefix = prefix
        self.stream = stream

        self.__lock = threading.Lock()
        self.__start_time = time.monotonic()
        self.__i = 0

    @property
    def i(self):
        return self.__i

    def __repr__(self):
        return self.render()

    def increment(self, inc=1, echo=False):
        with self.__lock:
            if self.__i + inc > self.total_iterations:
                raise ValueError(f'iterator value of \'{self.__i + inc}\' exceeds the iterator limit '
                                 f'of \'{self.total_iterations}\'')
            self.__i += inc
            if echo:
                self.__write(self.render(), end='\r')

    def render(self):
        fraction = self.i / self.total_iterations
        cells = fraction * self.bars
        full = int(cells)
        bar = self.bar_items[-1] * full
        if full < self.bars:
            bar += self.bar_items[int((cells - full) * (len(self.bar_items) - 1))]
            bar += ' ' * (self.bars - full - 1)

        elapsed = time.monotonic() - self.__start_time
        speed = self.i / elapsed if elapsed > 0 else 0
        eta = (self.total_iterations - self.i) / speed if speed > 0 else 0
        width = len(str(self.total_iterations))
        return f'{self.prefix} {100 * fraction:>3.0f}% [{bar}] {self.i:>{width}}/{self.total_iterations} ' \
               f'[ETA: {format_duration(eta)}, Elapsed: {format_duration(elapsed)}, Speed: {speed:.2f} it/s]'

    def print(self):
        self.__write(self.render(), end='\r')

    def close(self):
        self.__write(self.render(), end='\n')

    def __write(self, text, end):
        stream = sys.stderr if self.stream is None else self.stream
        stream.write(text + end)
        stream.flush()
