import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np

from algebra.polynomials import UniPoly
from errors import InvalidArgumentError
from family.map_family import MapFamily, StartPoint
from utils.plotting import PlotGrid, compute_plot_grid, emit_plot, gray_levels, pixel_centers, read_pgm
from utils.validators import PlotSpec

LAM = UniPoly([0, 1])


def grid_of(values):
    values = np.asarray(values, dtype=float)
    return PlotGrid(0j, 1.0, values.shape[0], 10, values)


class TestGrayLevels(TestCase):

    def test_zero_grid_is_black(self):
        self.assertFalse(gray_levels(np.zeros((3, 3))).any())

    def test_single_positive_pixel(self):
        values = np.zeros((4, 4))
        values[1, 2] = 0.3
        pixels = gray_levels(values)
        self.assertEqual(int(np.count_nonzero(pixels)), 1)
        self.assertEqual(pixels[1, 2], 255)

    def test_levels_are_proportional(self):
        pixels = gray_levels(np.array([[0.0, 1.0], [1.0, 2.0]]))
        self.assertEqual(pixels.tolist(), [[0, 127], [127, 255]])


class TestEmitPlot(TestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.root = Path(tmp.name)

    def test_pgm_header_and_body(self):
        image, sidecar = emit_plot(grid_of([[0.0, 1.0], [1.0, 2.0]]), self.root / "g.pgm")
        data = image.read_bytes()
        self.assertTrue(data.startswith(b"P5\n2 2\n255\n"))
        self.assertEqual(data[-4:], bytes([0, 127, 127, 255]))
        self.assertTrue(sidecar.exists())

    def test_read_back(self):
        image, _ = emit_plot(grid_of(np.zeros((5, 5))), self.root / "z.pgm")
        self.assertEqual(read_pgm(image).shape, (5, 5))

    def test_grid_shape_checked(self):
        with self.assertRaises(InvalidArgumentError):
            PlotGrid(0j, 1.0, 3, 10, np.zeros((2, 2)))


class TestComputePlotGrid(TestCase):

    def test_single_pixel_sits_at_the_center(self):
        self.assertEqual(pixel_centers(1 + 2j, 4.0, 1)[0, 0], 1 + 2j)

    def test_top_row_has_largest_imaginary_part(self):
        centers = pixel_centers(0j, 2.0, 4)
        self.assertGreater(centers[0, 0].imag, centers[-1, 0].imag)
        self.assertLess(centers[0, 0].real, centers[0, -1].real)

    def test_connectedness_locus_is_dark(self):
        fam, start = MapFamily([LAM, 0, 1]), StartPoint.of(0)
        grid = compute_plot_grid(fam, start, PlotSpec(center_re=-0.1, width=0.2, resolution=4, levels=20))
        self.assertTrue(np.all(grid.values == 0.0))

    def test_escaping_parameters_are_positive(self):
        fam, start = MapFamily([LAM, 0, 1]), StartPoint.of(0)
        grid = compute_plot_grid(fam, start, PlotSpec(center_re=3.0, width=0.5, resolution=3, levels=20))
        self.assertTrue(np.all(grid.values > 0))
        z = 0.0
        for _ in range(8):
            z = z * z + 3.0
        self.assertAlmostEqual(grid.values[1, 1], np.log(z) / 2 ** 8, delta=1e-6)

    def test_values_never_negative(self):
        fam = MapFamily([1, 0, 2], [LAM, 1])
        grid = compute_plot_grid(fam, StartPoint.of(LAM), PlotSpec(width=3.0, resolution=5, levels=12))
        self.assertTrue(np.all(grid.values >= 0))
        self.assertTrue(np.all(np.isfinite(grid.values)))
