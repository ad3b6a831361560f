"""Architectural state and instruction execution, one clock cycle at a time.

Every instruction costs two cycles: a fetch cycle that clocks the ROM
and an execute cycle that clocks only the modules the instruction
touches. Decode sits between them combinationally and consumes no
cycle of its own. After `reset()` the two reset states each consume a
cycle before the first fetch.

The UART transmitter needs its clock while a byte is draining, so its
enable is held high during those cycles regardless of what the current
instruction is doing (except in idle mode, which stops every module
clock and freezes the drain).
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from .control import (
    ALL_ENABLED,
    FsmState,
    GatingPolicy,
    latch_state,
    next_state,
    output_signals,
)
from .isa import IllegalOpcodeError, Instruction, Op, RomImage, decode
from .peripherals import Peripherals

RAM_WORDS = 1024
PC_MASK = 0xFF
WORD = 0xFFFF


@dataclass
class Flags:
    """Comparison state feeding the conditional branches.

    z: last ALU-class result was zero.
    l: last SUB/DEC borrowed (minuend below subtrahend, unsigned).
    """

    z: bool = False
    l: bool = False

    def clear(self) -> None:
        self.z = False
        self.l = False


@dataclass(frozen=True)
class IoEvent:
    """One observable I/O action."""

    cycle: int
    device: str     # port0 | port1 | sevenseg | uart
    direction: str  # out | in
    value: int


@dataclass(frozen=True)
class CycleRecord:
    """One trace row: what state the cycle ran in and what was clocked."""

    cycle: int
    pc: int
    fsm_state: str
    opcode: str
    enables: frozenset[str]


@dataclass(frozen=True)
class StepOutcome:
    """Result of advancing by one instruction (or one idle cycle)."""

    executed: Instruction | None
    pc_before: int
    pc_after: int
    modules_active: frozenset[str]
    io_events: tuple[IoEvent, ...]


@dataclass
class RunResult:
    cycles: int
    halted: bool
    halt_reason: str | None = None


@dataclass(frozen=True)
class Injection:
    """A host-driven input applied just before the given cycle ticks."""

    cycle: int
    kind: str  # port1 | uart_rx
    value: int

    def __post_init__(self):
        if self.kind not in ("port1", "uart_rx"):
            raise ValueError(f"unknown injection kind '{self.kind}'")
        if self.cycle < 0:
            raise ValueError("injection cycle must be >= 0")
        if not 0 <= self.value <= 0xFF:
            raise ValueError("injected value must be one byte")


class Machine:
    """The microcontroller: CPU core, memories, peripherals, clock gates."""

    def __init__(self, rom: RomImage | None = None, *,
                 policy: GatingPolicy | None = None, gating: bool = True,
                 uart_divisor: int = 10):
        self.rom = rom if rom is not None else RomImage()
        self.policy = policy if policy is not None else GatingPolicy()
        self.gating = gating
        self.regs = [0] * 8
        self.pc = 0
        self.flags = Flags()
        self.ram = array("H", [0] * RAM_WORDS)
        self.cycles = 0
        self.fsm = FsmState.FETCH
        self.peripherals = Peripherals()
        self.peripherals.uart.baud_divisor = uart_divisor
        self.records: list[CycleRecord] = []
        self.io_events: list[IoEvent] = []
        self.halted = False
        self.halt_reason: str | None = None
        self._instr: Instruction | None = None
        self._wake = False

    # -- host controls -------------------------------------------------

    def reset(self) -> None:
        """Pulse the reset line: architectural state clears atomically,
        then the two reset states each take a cycle before fetch."""
        self.pc = 0
        self.regs = [0] * 8
        self.flags.clear()
        self.peripherals.reset()
        self.fsm = FsmState.RESET1
        self.halted = False
        self.halt_reason = None
        self._instr = None
        self._wake = False

    def force_idle(self) -> None:
        """Host request to park the machine; call between instructions."""
        self.fsm = FsmState.IDLE

    def interrupt(self) -> None:
        """Wake signal; only idle mode observes it."""
        self._wake = True

    def inject_port1(self, value: int) -> None:
        self.peripherals.ports.inject_port1(value)

    def inject_uart_rx(self, value: int) -> None:
        self.peripherals.uart.inject_rx(value)

    # -- clocking ------------------------------------------------------

    def _row_enables(self, state: FsmState, op: Op) -> frozenset[str]:
        if not self.gating:
            return ALL_ENABLED
        enables = self.policy.enables(state, op)
        if state is not FsmState.IDLE and self.peripherals.uart.busy:
            enables = enables | {"uart"}
        return enables

    def _record(self, state: FsmState, opcode: str,
                enables: frozenset[str]) -> CycleRecord:
        row = CycleRecord(cycle=self.cycles, pc=self.pc,
                          fsm_state=state.value, opcode=opcode,
                          enables=enables)
        self.records.append(row)
        self.cycles += 1
        if "uart" in enables:
            for byte in self.peripherals.uart.tick(1):
                self.io_events.append(
                    IoEvent(row.cycle, "uart", "out", byte))
        return row

    def tick(self) -> CycleRecord:
        """Advance exactly one clock cycle."""
        state = self.fsm
        if state in (FsmState.RESET1, FsmState.RESET2):
            row = self._record(state, "-", self._row_enables(state, Op.NOP))
            self.fsm = latch_state(next_state(state, Op.NOP))
            return row
        if state is FsmState.IDLE:
            row = self._record(state, "-", self._row_enables(state, Op.NOP))
            self.fsm = latch_state(
                next_state(state, Op.NOP, interrupt=self._wake))
            self._wake = False
            return row
        if state is FsmState.FETCH:
            word = self.rom[self.pc]
            try:
                self._instr = decode(word)
            except IllegalOpcodeError:
                self._record(state, "-", self._row_enables(state, Op.NOP))
                raise
            op = self._instr.opcode
            row = self._record(state, op.name, self._row_enables(state, op))
            # Decode is combinational: pass through it within this edge.
            after_fetch = next_state(state, op)
            self.fsm = latch_state(next_state(after_fetch, op))
            return row
        # execute
        instr = self._instr
        assert instr is not None, "execute without a fetched instruction"
        enables = self._row_enables(state, instr.opcode)
        row = self._record(state, instr.opcode.name, enables)
        self._execute(instr)
        self.fsm = latch_state(next_state(state, instr.opcode))
        return row

    # -- execution semantics --------------------------------------------

    def _execute(self, instr: Instruction) -> None:
        op = instr.opcode
        rd, rs, imm = instr.rd, instr.rs, instr.operand8
        regs, flags = self.regs, self.flags
        here = self.pc
        target: int | None = None

        if op is Op.NOP:
            pass
        elif op is Op.LOAD:
            regs[rd] = self.ram[imm]
        elif op is Op.STORE:
            self.ram[imm] = regs[rd]
        elif op is Op.MOVE:
            regs[rd] = regs[rs]
        elif op is Op.LOADI:
            regs[rd] = imm
        elif op is Op.INC:
            result = (regs[rd] + 1) & WORD
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.DEC:
            flags.l = regs[rd] == 0  # borrow out of zero
            result = (regs[rd] - 1) & WORD
            regs[rd] = result
            flags.z = result == 0
        elif op in (Op.AND, Op.OR, Op.XOR, Op.ADD, Op.SUB):
            a, b = regs[rd], regs[rs]
            if op is Op.AND:
                result = a & b
            elif op is Op.OR:
                result = a | b
            elif op is Op.XOR:
                result = a ^ b
            elif op is Op.ADD:
                result = (a + b) & WORD
            else:
                flags.l = a < b
                result = (a - b) & WORD
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.NOT:
            result = ~regs[rd] & WORD
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.ZERO:
            regs[rd] = 0
            flags.z = True
        elif op is Op.SHL:
            result = (regs[rd] << 1) & WORD
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.SHR:
            result = regs[rd] >> 1
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.ROR:
            v = regs[rd]
            result = (v >> 1) | ((v & 1) << 15)
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.ROL:
            v = regs[rd]
            result = ((v << 1) & WORD) | (v >> 15)
            regs[rd] = result
            flags.z = result == 0
        elif op is Op.BI:
            target = imm
        elif op is Op.BGTI:
            if not flags.z and not flags.l:
                target = imm
        elif op is Op.BCH:
            target = regs[rd] & PC_MASK
        elif op is Op.BEQ:
            if flags.z:
                target = regs[rd] & PC_MASK
        elif op is Op.BNEQ:
            if not flags.z:
                target = regs[rd] & PC_MASK
        elif op is Op.BGT:
            if not flags.z and not flags.l:
                target = regs[rd] & PC_MASK
        elif op is Op.BLT:
            if flags.l:
                target = regs[rd] & PC_MASK
        elif op is Op.BLTE:
            if flags.l or flags.z:
                target = regs[rd] & PC_MASK
        elif op is Op.PORT0:
            value = regs[rd] & 0xFF
            self.peripherals.ports.write_port0(value)
            self.io_events.append(
                IoEvent(self.cycles - 1, "port0", "out", value))
        elif op is Op.PORT1:
            value = self.peripherals.ports.read_port1()
            regs[rd] = value
            self.io_events.append(
                IoEvent(self.cycles - 1, "port1", "in", value))
        elif op is Op.B7S:
            self.peripherals.sevenseg.show(regs[rd] & 0xF)
            self.io_events.append(
                IoEvent(self.cycles - 1, "sevenseg", "out",
                        self.peripherals.sevenseg.segments))
        elif op is Op.UARTS:
            self.peripherals.uart.send(regs[rd] & 0xFF)
        else:  # pragma: no cover - the decoder admits no other opcode
            raise AssertionError(op)

        if target is None:
            self.pc = (here + 1) & PC_MASK
        else:
            self.pc = target
            if target == here and op in (Op.BI, Op.BCH):
                # Unconditional branch to itself: the spin-forever idiom.
                self.halted = True
                self.halt_reason = "self-loop"

    # -- stepping ------------------------------------------------------

    def step(self) -> StepOutcome:
        """Advance one instruction (first draining any reset cycles), or
        one cycle when parked in idle."""
        while self.fsm in (FsmState.RESET1, FsmState.RESET2):
            self.tick()
        events_before = len(self.io_events)
        pc_before = self.pc
        if self.fsm is FsmState.IDLE:
            row = self.tick()
            return StepOutcome(None, pc_before, self.pc, row.enables,
                               tuple(self.io_events[events_before:]))
        self.tick()                  # fetch
        row = self.tick()            # execute
        return StepOutcome(self._instr, pc_before, self.pc, row.enables,
                           tuple(self.io_events[events_before:]))

    def run(self, max_cycles: int, *, halt_on_self_loop: bool = True,
            injections: "list[Injection] | None" = None) -> RunResult:
        """Tick until the cycle budget is spent or the program halts."""
        if max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        pending = sorted(injections or [], key=lambda inj: inj.cycle)
        i = 0
        while self.cycles < max_cycles:
            while i < len(pending) and pending[i].cycle <= self.cycles:
                inj = pending[i]
                if inj.kind == "port1":
                    self.inject_port1(inj.value)
                else:
                    self.inject_uart_rx(inj.value)
                i += 1
            self.tick()
            if self.halted and halt_on_self_loop:
                return RunResult(self.cycles, True, self.halt_reason)
        return RunResult(self.cycles, False)
