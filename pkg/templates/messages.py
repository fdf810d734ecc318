class MessageTemplates:
    """Human-readable summaries the CLI prints to stdout."""

    def __init__(self, program: str):
        """Initialize message templates.

        Args:
            program: Name shown in banners and diagnostics
        """
        self.program = program

        self.RUN_BANNER = f"{self.program} {{command}}: seed {{seed}}, {{threads}} worker(s), output in {{out}}"

        # One line per subcommand once artifacts are written
        self.SUMMARIES = {
            "validate": "family {verdict}: {detail}",
            "orbit": "{point} is {kind} for f{detail}",
            "height": "ĥ_f({point}) = {value:.12g} ± {radius:.3g} ({certified})",
            "height-alg": "ĥ_f(α) = {value:.12g} ± {radius:.3g} for α ≈ {alpha}",
            "family-iterate": "iterated {levels} level(s); degree law {verdict}",
            "find-params": "{count} preperiodic parameter(s): {rational} rational, {algebraic} algebraic",
            "correlate": "{rows} parameter(s): {coincide} coincide, {separate} separate, {undecided} undecided",
            "pcf": "{pairs} critical pair(s) correlated, {unsupported} unsupported",
            "metrics-report": "C1 = {C1:.6g}, C2 = {C2:.6g}; decay ratio {decay}, C11 = {C11:.6g}",
            "specialize": "ĥ_f(c) = {hhat}; sup error {sup_error:.6g}, trend statistic {trend}",
            "p2-step": "f({point}) = {image}",
            "p2-iterate": "iterated {levels} level(s); deg A_n = deg B_n = d^(n-1)",
            "p2-theta": "θ restriction holds through level {levels}",
            "p2-height": "ĥ({point}) = {value:.12g} ± {radius:.3g}",
            "p2-orbit": "{point} is {kind} for f_(λ,μ)",
            "p2-ratios": "ratio bounds {verdict}; L* = {L_star:.6g}",
            "p2-counterexample": "k = {k}: {verdict}; c₂ cycle {cycle}",
            "plot": "wrote {image} ({resolution}x{resolution}, v_max {v_max:.6g})",
        }

        # Diagnostics for failed runs, keyed by exit code
        self.FAILURES = {
            1: "{program}: {command} failed: {message}",
            2: "{program}: configuration error: {message}",
            3: "{program}: {command} hit a resource cap: {message} (partial output in {partial})",
            4: "{program}: internal invariant violated in {command}: {message}",
        }

        self.RESOURCE_NOTE = "partial results: computation stopped at a configured degree or size cap"

    def banner(self, command: str, seed: int, threads: int, out: str) -> str:
        return self.RUN_BANNER.format(command=command, seed=seed, threads=threads, out=out)

    def summary(self, key: str, **fields) -> str:
        return self.SUMMARIES[key].format(**fields)

    def failure(self, exit_code: int, command: str, message: str, partial: str = "-") -> str:
        template = self.FAILURES.get(exit_code, self.FAILURES[1])
        return template.format(program=self.program, command=command, message=message, partial=partial)
