"""Scalar backends: exact Gaussian rationals and floating complex numbers.

Every computation in the package runs over one of two scalar fields,
selected by the string ``backend``:

* ``"exact"`` -- Gaussian rationals (complex numbers with Fraction real and
  imaginary parts).  All arithmetic is exact; equality is honest equality.
* ``"float"`` -- ordinary Python/numpy complex.  Needed wherever a phase
  ``exp(2*pi*i*theta)`` with irrational ``theta`` enters.
"""

from fractions import Fraction

EXACT = "exact"
FLOAT = "float"

BACKENDS = (EXACT, FLOAT)


class GaussianRational:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if isinstance(re, Fraction) else Fraction(re))
        object.__setattr__(self, "im", im if isinstance(im, Fraction) else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return QI_ONE / self ** (-exponent)
        out = QI_ONE
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def abs2(self):
        """|z|^2 as an exact Fraction."""
        return self.re * self.re + self.im * self.im

    # -- comparisons / conversions ------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"QI({self.re})"
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


QI = GaussianRational

QI_ZERO = QI(0)
QI_ONE = QI(1)


def qi(re, im=0):
    return GaussianRational(re, im)


def zero(backend):
    return QI_ZERO if backend == EXACT else 0j


def one(backend):
    return QI_ONE if backend == EXACT else 1 + 0j


def conj(z):
    # works for GaussianRational, complex, float and int alike
    return z.conjugate()


def as_complex(z):
    if isinstance(z, GaussianRational):
        return complex(z)
    return complex(z)


def is_zero(z, tol=0.0):
    if isinstance(z, GaussianRational):
        return not z
    return abs(z) <= tol


def check_backend(backend):
    if backend not in BACKENDS:
        raise ValueError(f"unknown scalar backend {backend!r}; expected one of {BACKENDS}")
    return backend


def parse_rational(value):
    """Parse an exact rational from an int or a 'p/q' / 'p' string."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational from {value!r}") from exc
    if isinstance(value, float):
        if value == int(value):
            return Fraction(int(value))
        raise ValueError(
            f"refusing to interpret non-integral float {value!r} as an exact "
            "rational; write it as a 'p/q' string"
        )
    raise ValueError(f"cannot parse rational from {value!r}")


def parse_scalar(value, backend):
    """Parse a scalar coefficient from its JSON form.

    Accepted forms: a plain number, a ``[re, im]`` pair, or an
    ``{"re": ..., "im": ...}`` object; real/imaginary parts may be 'p/q'
    strings on the exact backend.
    """
    check_backend(backend)
    if isinstance(value, dict):
        re_part = value.get("re", 0)
        im_part = value.get("im", 0)
    elif isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex coefficient pair must have length 2, got {value!r}")
        re_part, im_part = value
    else:
        re_part, im_part = value, 0
    if backend == EXACT:
        return GaussianRational(parse_rational(re_part), parse_rational(im_part))
    return complex(_to_float(re_part), _to_float(im_part))


def _to_float(v):
    if isinstance(v, str):
        return float(Fraction(v.strip()))
    return float(v)


def coerce_scalar(value, backend):
    """Coerce an in-process value (number / Fraction / QI) to the backend."""
    check_backend(backend)
    if backend == EXACT:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        if isinstance(value, complex):
            return GaussianRational(parse_rational(value.real), parse_rational(value.imag))
        if isinstance(value, float):
            return GaussianRational(parse_rational(value))
        raise ValueError(f"cannot coerce {value!r} to an exact scalar")
    return as_complex(value)


def format_scalar(z, float_digits=12):
    """Render a scalar for reports: exact values verbatim, floats at fixed width."""
    if isinstance(z, (GaussianRational, Fraction, int)):
        return str(z)
    c = complex(z)
    if c.imag == 0:
        return f"{c.real:.{float_digits}g}"
    return f"{c.real:.{float_digits}g}{c.imag:+.{float_digits}g}i"
