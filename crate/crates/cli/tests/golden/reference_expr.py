"""Reference interpreter for coefficient expressions.

Independent recursive-descent parser; derivatives by forward-mode dual numbers.
Writes expressions.tsv: production, expression, t, value, derivative.
"""
import math
import re
import sys


class Dual:
    def __init__(self, v, d=0.0):
        self.v, self.d = v, d

    def __add__(self, o):
        return Dual(self.v + o.v, self.d + o.d)

    def __sub__(self, o):
        return Dual(self.v - o.v, self.d - o.d)

    def __mul__(self, o):
        return Dual(self.v * o.v, self.d * o.v + self.v * o.d)

    def __truediv__(self, o):
        return Dual(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))

    def __neg__(self):
        return Dual(-self.v, -self.d)


def dpow(a, b):
    v = a.v ** b.v
    d = b.v * a.v ** (b.v - 1.0) * a.d if b.d == 0.0 else v * (b.d * math.log(a.v) + b.v * a.d / a.v)
    return Dual(v, d)


FUNCS = {
    "sin": lambda a: Dual(math.sin(a.v), math.cos(a.v) * a.d),
    "cos": lambda a: Dual(math.cos(a.v), -math.sin(a.v) * a.d),
    "tan": lambda a: Dual(math.tan(a.v), a.d / math.cos(a.v) ** 2),
    "exp": lambda a: Dual(math.exp(a.v), math.exp(a.v) * a.d),
    "log": lambda a: Dual(math.log(a.v), a.d / a.v),
    "sqrt": lambda a: Dual(math.sqrt(a.v), 0.5 * a.d / math.sqrt(a.v)),
    "abs": lambda a: Dual(abs(a.v), math.copysign(1.0, a.v) * a.d if a.v != 0 else 0.0),
    "sinh": lambda a: Dual(math.sinh(a.v), math.cosh(a.v) * a.d),
    "cosh": lambda a: Dual(math.cosh(a.v), math.sinh(a.v) * a.d),
}

TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(.))")


def tokenize(s):
    out = []
    for m in TOKEN.finditer(s):
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif name is not None:
            out.append(("name", name))
        elif op is not None and not op.isspace():
            out.append(("op", op))
    out.append(("end", None))
    return out


class Interp:
    def __init__(self, text, t):
        self.toks, self.i, self.t = tokenize(text), 0, t

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def sum(self):
        v = self.product()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            r = self.product()
            v = v + r if op == "+" else v - r
        return v

    def product(self):
        v = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            r = self.unary()
            v = v * r if op == "*" else v / r
        return v

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek() == ("op", "^"):
            self.take()
            return dpow(base, self.unary())
        return base

    def primary(self):
        kind, val = self.take()
        if kind == "num":
            return Dual(val)
        if kind == "op" and val == "(":
            v = self.sum()
            assert self.take() == ("op", ")")
            return v
        if kind == "name":
            if val == "t":
                return Dual(self.t, 1.0)
            if val == "pi":
                return Dual(math.pi)
            assert self.take() == ("op", "(")
            args = [self.sum()]
            while self.peek() == ("op", ","):
                self.take()
                args.append(self.sum())
            assert self.take() == ("op", ")")
            if val == "pow":
                return dpow(args[0], args[1])
            return FUNCS[val](args[0])
        raise SyntaxError((kind, val))


def evaluate(text, t):
    it = Interp(text, t)
    v = it.sum()
    assert it.peek()[0] == "end"
    return v


PRODUCTIONS = [
    ("number", "2.5e-1 + 3"),
    ("variable", "t"),
    ("pi", "pi*t"),
    ("add", "t + 1.5"),
    ("sub", "2 - t - t"),
    ("mul", "3*t*t"),
    ("div", "1/(1 + t)/t"),
    ("pow", "t^2.5"),
    ("pow_right_assoc", "1.1^t^2"),
    ("unary_minus", "-t^2 + -(-t)"),
    ("parens", "(t + 1)*(t - 2)"),
    ("sin", "sin(3*t)"),
    ("cos", "cos(t^2)"),
    ("tan", "tan(t/2)"),
    ("exp", "exp(-t*t)"),
    ("log", "log(1 + t)"),
    ("sqrt", "sqrt(t + 0.5)"),
    ("abs", "abs(t - 1.3)"),
    ("sinh", "sinh(t - 1)"),
    ("cosh", "cosh(2*t)"),
    ("pow_call", "pow(t, t)"),
    ("mixed", "t^2/(1+t) - 3*sin(t)^2*exp(-t/2)"),
]


def main(path):
    n = 1000
    with open(path, "w") as fh:
        fh.write("production\texpression\tt\tvalue\tderivative\n")
        for name, text in PRODUCTIONS:
            for i in range(n):
                # quasi-random points in [0.1, 2.5]
                t = 0.1 + 2.4 * ((i * 0.6180339887498949 + 0.5 / n) % 1.0)
                v = evaluate(text, t)
                fh.write(f"{name}\t{text}\t{t!r}\t{v.v!r}\t{v.d!r}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "expressions.tsv")
