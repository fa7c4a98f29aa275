"""Built-in example programs served by the editor and used as a test corpus."""

from __future__ import annotations

ARITH = """\
# Tight read-after-write chain: the classic forwarding demo.
# With forwarding this finishes in 7 cycles; without it, 9.
main:
    addi x1, x0, 1
    addi x2, x0, 2
    add  x3, x1, x2
"""

LOAD_USE = """\
# A load immediately feeding its consumer: the unavoidable stall.
.data
value:  .dword 7
.text
main:
    la   a0, value
    ld   a1, 0(a0)
    add  a2, a1, a1      # needs a1 one cycle too early
"""

LOOP_SUM = """\
# Sum 5 + 4 + 3 + 2 + 1 with a backward branch, then print the total.
# Run the squashed pipeline diagram on this one.
main:
    addi t0, x0, 5       # counter
    addi t1, x0, 0       # accumulator
loop:
    add  t1, t1, t0
    addi t0, t0, -1
    bne  t0, x0, loop
    mv   a0, t1
    li   a7, 1           # print_int
    ecall
    li   a7, 10          # exit
    ecall
"""

STRING_IO = """\
# Console round trip: prompt for a name, read a line, greet.
.data
prompt: .asciiz "name? "
greet:  .asciiz "hello, "
buffer: .space 32
.text
main:
    la   a0, prompt
    li   a7, 4           # print_string
    ecall
    la   a0, buffer
    li   a1, 32
    li   a7, 8           # read_string
    ecall
    la   a0, greet
    li   a7, 4
    ecall
    la   a0, buffer
    li   a7, 4
    ecall
    li   a7, 10          # exit
    ecall
"""

RECURSION = """\
# Recursive factorial on the stack; prints 5! = 120.
main:
    li   a0, 5
    call fact
    li   a7, 1           # print_int
    ecall
    li   a7, 10          # exit
    ecall
fact:
    addi sp, sp, -16
    sd   ra, 8(sp)
    sd   a0, 0(sp)
    li   t0, 2
    blt  a0, t0, base
    addi a0, a0, -1
    call fact
    ld   t1, 0(sp)
    mul  a0, a0, t1
    j    done
base:
    li   a0, 1
done:
    ld   ra, 8(sp)
    addi sp, sp, 16
    ret
"""

MULDIV = """\
# Multiply/divide corner cases: division by zero and signed overflow.
main:
    li   t0, 7
    li   t1, 0
    div  t2, t0, t1      # -1 (divide by zero)
    rem  t3, t0, t1      # 7  (remainder keeps the dividend)
    li   t4, 1
    slli t4, t4, 63      # most-negative 64-bit value
    li   t5, -1
    div  t6, t4, t5      # overflows back to most-negative
    rem  s2, t4, t5      # 0
    mulhu s3, t4, t4     # high half of an unsigned square
"""

EXAMPLES: tuple[dict, ...] = (
    {"name": "arith", "title": "Straight-line arithmetic (RAW chain)", "source": ARITH},
    {"name": "load_use", "title": "Load-use hazard", "source": LOAD_USE},
    {"name": "loop_sum", "title": "Counted loop with a branch", "source": LOOP_SUM},
    {"name": "string_io", "title": "String I/O on the console", "source": STRING_IO},
    {"name": "recursion", "title": "Recursive factorial using the stack", "source": RECURSION},
    {"name": "muldiv", "title": "M-extension corner cases", "source": MULDIV},
)


def get_example(name: str) -> dict | None:
    for e in EXAMPLES:
        if e["name"] == name:
            return e
    return None
