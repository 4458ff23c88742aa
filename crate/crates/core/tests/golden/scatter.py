# Scatter plot template.
#
# To plot your own data:
#   1. Replace x_data and y_data below with two equally long columns.
#      With pandas:
#          df = pd.read_csv("my_data.csv")
#          x_data = df["x"].to_numpy()
#          y_data = df["y"].to_numpy()
#   2. Edit the title and axis labels.
#   3. Run the cell.

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

# Figure size in inches as (width, height). Enlarge it for slides, shrink it for papers.
figsize = (8, 6)
title = "Housing Summary Scores Lengths"

# One point per (x, y) pair. Placeholder values; replace with your data.
x_data = [25, 50, 75, 100]
y_data = np.random.uniform(0, 100, size=len(x_data))
series_names = ["Series 1"]

x = x_data
y = y_data

fig, ax = plt.subplots(figsize=figsize)
# s sets the marker size, marker the shape ("o", "s", "^", ...).
ax.scatter(x, y, s=30, marker="o", label=series_names[0])
ax.set_title(title)
ax.set_xlabel("Quarter")
ax.set_ylabel("Visitors")
plt.tight_layout()
plt.show()
