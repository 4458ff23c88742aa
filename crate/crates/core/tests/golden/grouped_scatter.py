# Grouped scatter plot template.
#
# To plot your own data:
#   1. Replace x_data with the shared x values and y_data with one row of
#      y values per group (same order as series_names). With pandas:
#          df = pd.read_csv("my_data.csv")
#          x_data = df["x"].to_numpy()
#          y_data = df[series_names].to_numpy().T
#   2. Edit the title, axis labels and group names.
#   3. Run the cell.

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

# Figure size in inches as (width, height). Enlarge it for slides, shrink it for papers.
figsize = (8, 6)
title = "Housing Summary Scores Lengths"

x_data = [25, 50, 75, 100]
series_names = ["Winter", "After"]
# Placeholder values, shape (2, number of x values).
y_data = np.random.uniform(0, 100, size=(len(series_names), len(x_data)))

x = x_data
y = y_data

fig, ax = plt.subplots(figsize=figsize)
for name, values in zip(series_names, y):
    ax.scatter(x, values, s=30, label=name)
ax.set_title(title)
ax.set_xlabel("Quarter")
ax.set_ylabel("Visitors")
ax.legend(loc="upper right")
plt.tight_layout()
plt.show()
