"""Box-regression losses and gradient checking."""

from .box_losses import BoxGradient, LossKind, finite_diff_gradient, loss, loss_gradient

__all__ = ["BoxGradient", "LossKind", "finite_diff_gradient", "loss", "loss_gradient"]
