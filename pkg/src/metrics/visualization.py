"""
Plotting utilities for evaluation and benchmark results
"""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import seaborn as sns
import pandas as pd
from pathlib import Path
from typing import Optional, Sequence, Tuple

from src.experiments.convergence_sim import Trajectory
from src.metrics.detection_eval import PRPoint


class ResultVisualizer:
    """Writes PR-curve and convergence figures as PNG files"""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        plt.style.use('seaborn-v0_8-whitegrid')
        self.colors = sns.color_palette("husl", 8)

    def _save(self, fig, filename: str) -> Path:
        plot_path = self.output_dir / filename
        fig.savefig(plot_path, dpi=150, bbox_inches='tight')
        plt.close(fig)
        return plot_path

    def create_pr_curve_plot(self, curve: Sequence[PRPoint], ap: Optional[float] = None,
                             filename: str = "pr_curve.png") -> Path:
        """Precision against recall, one marker per prefix of the ranked detections"""
        fig, ax = plt.subplots(figsize=(7, 6))
        if curve:
            recalls = [p.recall for p in curve]
            precisions = [p.precision for p in curve]
            label = 'PR curve' if ap is None else f'PR curve (AP {ap * 100:.2f}%)'
            ax.step(recalls, precisions, where='post', color=self.colors[0], label=label)
            ax.legend(loc='lower left')
        else:
            ax.text(0.5, 0.5, 'No detections', ha='center', va='center', transform=ax.transAxes)

        ax.set_xlim(0.0, 1.05)
        ax.set_ylim(0.0, 1.05)
        ax.set_xlabel('Recall', fontsize=12)
        ax.set_ylabel('Precision', fontsize=12)
        ax.set_title('Precision-Recall Curve', fontsize=14)
        return self._save(fig, filename)

    def create_loss_curve_plot(self, pair: Tuple[Trajectory, Trajectory],
                               filename: str = "loss_curves.png") -> Path:
        """Loss per descent step for the IoU and DIoU runs of one case"""
        fig, ax = plt.subplots(figsize=(9, 6))
        for i, trajectory in enumerate(pair):
            ax.plot(range(len(trajectory.losses)), trajectory.losses,
                    color=self.colors[i * 4], linewidth=2, label=f'{trajectory.kind.value.upper()} loss')
        ax.set_xlabel('Step', fontsize=12)
        ax.set_ylabel('Loss', fontsize=12)
        ax.set_title('Loss Curves: IoU vs DIoU', fontsize=14)
        ax.legend()
        return self._save(fig, filename)

    def create_steps_distribution(self, cases: pd.DataFrame,
                                  filename: str = "steps_distribution.png") -> Path:
        """Steps-to-success per loss kind and start partition, successes only"""
        rows = []
        for kind in ('iou', 'diou'):
            converged = cases[cases[f'converged_{kind}']] if not cases.empty else cases
            for _, row in converged.iterrows():
                rows.append({
                    'loss': kind.upper(),
                    'partition': row['partition'],
                    'steps': float(row[f'steps_{kind}']),
                })
        df = pd.DataFrame(rows, columns=['loss', 'partition', 'steps'])

        fig, ax = plt.subplots(figsize=(9, 6))
        if df.empty:
            ax.text(0.5, 0.5, 'No converged cases', ha='center', va='center', transform=ax.transAxes)
            ax.set_xticks([])
        else:
            sns.boxplot(data=df, x='partition', y='steps', hue='loss', ax=ax)
            ax.set_yscale('symlog')
        ax.set_xlabel('Start', fontsize=12)
        ax.set_ylabel('Steps to success', fontsize=12)
        ax.set_title('Convergence Speed by Loss', fontsize=14)
        return self._save(fig, filename)
