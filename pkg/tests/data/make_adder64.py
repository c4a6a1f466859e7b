"""Regenerate adder64.txt: 64-bit ripple adder in Bristol Fashion.

Layout follows the widely distributed adder64 file: 376 gates, 504 wires,
inputs 2 x 64, one 64-bit output on the last wires.  Per bit the sum is
a ^ b ^ c and the carry is ((a ^ c) & (b ^ c)) ^ c.
"""
import pathlib

from lanmpc.circuit import CircuitBuilder, dump_bristol

b = CircuitBuilder(64, 64)
xs, ys = list(b.garbler_inputs), list(b.evaluator_inputs)
sums = [b.xor(xs[0], ys[0])]
carry = b.and_(xs[0], ys[0])
for i in range(1, 64):
    sums.append(b.xor(b.xor(xs[i], ys[i]), carry))
    if i < 63:
        t = b.and_(b.xor(xs[i], carry), b.xor(ys[i], carry))
        carry = b.xor(t, carry)
text = dump_bristol(b.build(sums), output_groups=[64])
pathlib.Path(__file__).with_name("adder64.txt").write_text(text)
