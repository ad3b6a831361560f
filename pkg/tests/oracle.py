"""Naive straight-line reference interpreter used as a test oracle.

Deliberately independent of the package internals: programs are plain
(mnemonic, rd, rs, imm) tuples, state is a handful of dicts, and every
opcode's effect is written out longhand from the semantics table. No
branches: programs run top to bottom exactly once.
"""

MASK = 0xFFFF


class RefState:
    def __init__(self, port1_input=0):
        self.regs = [0] * 8
        self.ram = {}
        self.z = False
        self.l = False
        self.pc = 0
        self.port0 = 0
        self.port1_input = port1_input
        self.sevenseg_digit = 0
        self.uart_sent = []


def run_program(program, port1_input=0):
    """Execute a branch-free instruction list once, top to bottom."""
    s = RefState(port1_input)
    for mnemonic, rd, rs, imm in program:
        if mnemonic == "NOP":
            pass
        elif mnemonic == "LOAD":
            s.regs[rd] = s.ram.get(imm, 0)
        elif mnemonic == "STORE":
            s.ram[imm] = s.regs[rd]
        elif mnemonic == "MOVE":
            s.regs[rd] = s.regs[rs]
        elif mnemonic == "LOADI":
            s.regs[rd] = imm
        elif mnemonic == "INC":
            s.regs[rd] = (s.regs[rd] + 1) & MASK
            s.z = s.regs[rd] == 0
        elif mnemonic == "DEC":
            s.l = s.regs[rd] == 0
            s.regs[rd] = (s.regs[rd] - 1) & MASK
            s.z = s.regs[rd] == 0
        elif mnemonic == "AND":
            s.regs[rd] = s.regs[rd] & s.regs[rs]
            s.z = s.regs[rd] == 0
        elif mnemonic == "OR":
            s.regs[rd] = s.regs[rd] | s.regs[rs]
            s.z = s.regs[rd] == 0
        elif mnemonic == "XOR":
            s.regs[rd] = s.regs[rd] ^ s.regs[rs]
            s.z = s.regs[rd] == 0
        elif mnemonic == "NOT":
            s.regs[rd] = ~s.regs[rd] & MASK
            s.z = s.regs[rd] == 0
        elif mnemonic == "ADD":
            s.regs[rd] = (s.regs[rd] + s.regs[rs]) & MASK
            s.z = s.regs[rd] == 0
        elif mnemonic == "SUB":
            s.l = s.regs[rd] < s.regs[rs]
            s.regs[rd] = (s.regs[rd] - s.regs[rs]) & MASK
            s.z = s.regs[rd] == 0
        elif mnemonic == "ZERO":
            s.regs[rd] = 0
            s.z = True
        elif mnemonic == "SHL":
            s.regs[rd] = (s.regs[rd] << 1) & MASK
            s.z = s.regs[rd] == 0
        elif mnemonic == "SHR":
            s.regs[rd] = s.regs[rd] >> 1
            s.z = s.regs[rd] == 0
        elif mnemonic == "ROR":
            v = s.regs[rd]
            s.regs[rd] = (v >> 1) | ((v & 1) << 15)
            s.z = s.regs[rd] == 0
        elif mnemonic == "ROL":
            v = s.regs[rd]
            s.regs[rd] = ((v << 1) & MASK) | (v >> 15)
            s.z = s.regs[rd] == 0
        elif mnemonic == "PORT0":
            s.port0 = s.regs[rd] & 0xFF
        elif mnemonic == "PORT1":
            s.regs[rd] = s.port1_input
        elif mnemonic == "B7S":
            s.sevenseg_digit = s.regs[rd] & 0xF
        elif mnemonic == "UARTS":
            s.uart_sent.append(s.regs[rd] & 0xFF)
        else:
            raise ValueError(f"oracle cannot run {mnemonic}")
        s.pc = (s.pc + 1) & 0xFF
    return s
