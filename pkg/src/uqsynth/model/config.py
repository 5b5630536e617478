"""Synthesis network configuration."""

from dataclasses import dataclass


@dataclass
class ModelConfig:
    """Architecture and seeding for the view -> image network.

    The decoder starts from a 4x4 latent image and doubles resolution per
    residual block, so 4 * 2**n_res_blocks must equal image_resolution.
    Channel width starts at base_channels and halves per block with a
    floor of 16 (never widening past the block's input width).
    """

    image_resolution: int = 32
    n_res_blocks: int = 3
    fc_widths: tuple[int, ...] = (64, 512)
    base_channels: int = 64
    dropout_p: float = 0.1
    seed: int = 0

    def __post_init__(self):
        self.fc_widths = tuple(int(w) for w in self.fc_widths)
        if self.image_resolution < 16 or (
            self.image_resolution & (self.image_resolution - 1)
        ):
            raise ValueError(
                f"image_resolution must be a power of 2 >= 16, got {self.image_resolution}"
            )
        if 4 * 2 ** self.n_res_blocks != self.image_resolution:
            raise ValueError(
                f"4 * 2^n_res_blocks must equal image_resolution; "
                f"got n_res_blocks={self.n_res_blocks}, resolution={self.image_resolution}"
            )
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if not self.fc_widths:
            raise ValueError("fc_widths must name at least one hidden width")
        if self.base_channels < 1:
            raise ValueError("base_channels must be positive")

    def channel_schedule(self) -> list[int]:
        """Per-block (input, output) channel widths, starting at base_channels."""
        chans = [self.base_channels]
        for _ in range(self.n_res_blocks):
            c = chans[-1]
            chans.append(max(c // 2, min(c, 16)))
        return chans

    def parameter_count(self) -> int:
        """Total scalar parameters implied by the config (excl. BN buffers)."""
        total = 0
        widths = (2,) + self.fc_widths + (self.base_channels * 16,)
        for a, b in zip(widths, widths[1:]):
            total += a * b + b
        chans = self.channel_schedule()
        for cin, cout in zip(chans, chans[1:]):
            total += cout * cin * 9 + cout      # conv1
            total += 2 * cout                   # bn1 gamma/beta
            total += cout * cout * 9 + cout     # conv2
            total += 2 * cout                   # bn2
            total += cout * cin + cout          # 1x1 skip
        total += 3 * chans[-1] * 9 + 3          # output conv
        return total

    def to_jsonable(self) -> dict:
        return {
            "image_resolution": self.image_resolution,
            "n_res_blocks": self.n_res_blocks,
            "fc_widths": list(self.fc_widths),
            "base_channels": self.base_channels,
            "dropout_p": self.dropout_p,
            "seed": self.seed,
        }

    @staticmethod
    def from_jsonable(data: dict) -> "ModelConfig":
        return ModelConfig(
            image_resolution=data["image_resolution"],
            n_res_blocks=data["n_res_blocks"],
            fc_widths=tuple(data["fc_widths"]),
            base_channels=data["base_channels"],
            dropout_p=data["dropout_p"],
            seed=data["seed"],
        )
